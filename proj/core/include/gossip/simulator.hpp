#pragma once

// Seeded, synchronous execution of the gossip-without-recall protocol.
//
// Round 0: every agent draws s_{i,0} and forms its initial belief from the
// common prior. Round t >= 1: every agent draws s_{i,t} and a neighbour
// sigma_{t,i} from row i of P, then updates from sigma_{t,i}'s round t-1
// belief. All agents read round t-1 and write round t (double buffered).
//
// Randomness: each draw uses its own SplitMix64 substream keyed by
// (seed, purpose, round, agent), so a trace is a pure function of its inputs
// and no draw depends on evaluation order.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gossip/belief.hpp"
#include "gossip/graph.hpp"
#include "gossip/world.hpp"

namespace gossip {

struct SimulationConfig {
  std::uint64_t horizon = 1;
  std::uint64_t seed = 0;
  std::uint64_t record_every = 1;
  std::uint64_t replications = 1;

  // Throws ValidationError on a zero horizon, stride or replication count.
  void validate() const;
  friend bool operator==(const SimulationConfig&, const SimulationConfig&) = default;
};

class SimulationTrace {
 public:
  SimulationTrace(std::size_t agents, std::size_t states, StateIndex true_state,
                  std::uint64_t horizon, std::uint64_t seed);

  std::size_t agent_count() const { return agents_; }
  std::size_t state_count() const { return states_; }
  StateIndex true_state() const { return true_state_; }
  std::uint64_t horizon() const { return horizon_; }
  std::uint64_t seed() const { return seed_; }

  // s_{i,t}, t in [0, horizon].
  Signal signal(Agent i, std::uint64_t t) const { return signals_[t * agents_ + i]; }
  // sigma_{t,i}, t in [1, horizon].
  Agent selection(std::uint64_t t, Agent i) const { return selections_[(t - 1) * agents_ + i]; }

  const std::vector<std::uint64_t>& snapshot_times() const { return snapshot_times_; }
  bool has_snapshot(std::uint64_t t) const;
  // Log belief of agent i at a recorded time; throws std::out_of_range if t
  // was not recorded.
  std::span<const double> log_belief(Agent i, std::uint64_t t) const;
  BeliefState belief(Agent i, std::uint64_t t) const;

  std::uint64_t world_fingerprint = 0;
  std::uint64_t matrix_fingerprint = 0;

  // Builders, used by the simulator and by the CSV reader.
  void set_signal(Agent i, std::uint64_t t, Signal s) { signals_[t * agents_ + i] = s; }
  void set_selection(std::uint64_t t, Agent i, Agent j) {
    selections_[(t - 1) * agents_ + i] = static_cast<std::uint32_t>(j);
  }
  // Snapshots must be appended in increasing time; `log_beliefs` is
  // agent-major (agents * states).
  void add_snapshot(std::uint64_t t, std::span<const double> log_beliefs);

  friend bool operator==(const SimulationTrace&, const SimulationTrace&) = default;

 private:
  std::size_t snapshot_slot(std::uint64_t t) const;

  std::size_t agents_;
  std::size_t states_;
  StateIndex true_state_;
  std::uint64_t horizon_;
  std::uint64_t seed_;
  std::vector<Signal> signals_;
  std::vector<std::uint32_t> selections_;
  std::vector<std::uint64_t> snapshot_times_;
  std::vector<double> snapshots_;
};

// Stable 64-bit fingerprints (FNV-1a over the numeric content).
std::uint64_t fingerprint(const WorldModel& world);
std::uint64_t fingerprint(const SelectionMatrix& p);

// One run with cfg.seed. Snapshots are taken at t = 0, every record_every
// rounds, and always at the horizon. Throws ValidationError if the inputs
// disagree on n, or if P puts mass outside N(i) and i.
SimulationTrace run(const DirectedNetwork& net, const SelectionMatrix& p, const WorldModel& world,
                    const SimulationConfig& cfg,
                    const JointSignalSampler& sampler = sample_independent_signals);

// cfg.replications independent runs, seeds from replication_seed(cfg.seed, r),
// executed in parallel and returned in replication order.
std::vector<SimulationTrace> run_replications(const DirectedNetwork& net, const SelectionMatrix& p,
                                              const WorldModel& world, const SimulationConfig& cfg,
                                              unsigned threads = 0);

// (i, i_1, ..., i_t) with i_1 = sigma_{t,i} and i_{k+1} = sigma_{t-k, i_k}.
std::vector<Agent> backward_walk(const SimulationTrace& trace, Agent i, std::uint64_t t);

// Right-hand side of the telescoped log belief ratio for agent i at time t:
//   own signal term + prior term + sum over the backward walk of the signal
//   log-likelihood ratios picked up at each visited (node, time).
struct WalkDecomposition {
  double own_signal = 0.0;
  double prior = 0.0;
  double walk = 0.0;

  double total() const { return own_signal + prior + walk; }
};

WalkDecomposition walk_decomposition(const SimulationTrace& trace, const WorldModel& world,
                                     Agent i, std::uint64_t t, StateIndex check_state);

// |recorded log ratio - walk decomposition|. Zero when both sides are -inf;
// throws ValidationError when exactly one side is infinite.
double verify_walk_identity(const SimulationTrace& trace, const WorldModel& world, Agent i,
                            std::uint64_t t, StateIndex check_state);

// Recomputes every belief from the recorded signals and selections; returns
// the first recorded time whose snapshot differs (bitwise), or nullopt.
std::optional<std::uint64_t> replay_mismatch(const SimulationTrace& trace, const WorldModel& world);

}  // namespace gossip
