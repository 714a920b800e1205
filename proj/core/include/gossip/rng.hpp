#pragma once

#include <cstdint>

namespace gossip {

// SplitMix64 finaliser (Steele, Lea, Flood 2014). Fixed integer arithmetic,
// so streams are identical on every platform.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Sequential SplitMix64 stream. Every random draw in the library goes
// through this type; doubles are formed from the top 53 bits.
class RandomStream {
 public:
  explicit constexpr RandomStream(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1).
  constexpr double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

enum class DrawPurpose : std::uint64_t { kSignal = 1, kSelection = 2 };

// Seed of the substream for one (purpose, round, agent) draw. Rounds and
// agents are hashed in separately so substreams never overlap in practice.
constexpr std::uint64_t substream_seed(std::uint64_t master, DrawPurpose purpose,
                                       std::uint64_t round, std::uint64_t agent) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  h = splitmix64(h ^ round);
  return splitmix64(h ^ agent);
}

// Seed of replication r derived from the master seed.
constexpr std::uint64_t replication_seed(std::uint64_t master, std::uint64_t replication) {
  return replication == 0 ? master : splitmix64(master ^ splitmix64(replication));
}

}  // namespace gossip
