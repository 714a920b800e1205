#pragma once

// The environment agents learn about: a finite state space with a hidden true
// state, a common prior, and one signal structure per agent. All logarithms
// are natural (nats).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gossip/graph.hpp"
#include "gossip/rng.hpp"

namespace gossip {

using StateIndex = std::size_t;
using Signal = std::uint32_t;

inline constexpr double kProbabilityTolerance = 1e-12;
inline constexpr double kDistinguishTolerance = 1e-12;

class StateSpace {
 public:
  // Labels must be unique and non-empty as a list.
  StateSpace(std::vector<std::string> labels, StateIndex true_state);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(StateIndex k) const { return labels_.at(k); }
  StateIndex true_state() const { return true_state_; }
  // Throws ValidationError for an unknown label.
  StateIndex index_of(const std::string& label) const;

 private:
  std::vector<std::string> labels_;
  StateIndex true_state_;
};

// Strictly positive, sums to one.
class Prior {
 public:
  explicit Prior(std::vector<double> nu);
  static Prior uniform(std::size_t states);

  std::size_t size() const { return nu_.size(); }
  const std::vector<double>& values() const { return nu_; }
  double operator[](StateIndex k) const { return nu_.at(k); }

 private:
  std::vector<double> nu_;
};

// l_i(s | state): one row per state, one column per signal value.
class LikelihoodTable {
 public:
  LikelihoodTable(std::size_t states, std::size_t signals, std::vector<double> row_major);
  static LikelihoodTable from_rows(std::span<const std::vector<double>> rows);

  std::size_t state_count() const { return states_; }
  std::size_t signal_count() const { return signals_; }
  double operator()(StateIndex state, Signal s) const { return p_[state * signals_ + s]; }
  double log(StateIndex state, Signal s) const { return log_p_[state * signals_ + s]; }
  std::span<const double> row(StateIndex state) const {
    return {p_.data() + state * signals_, signals_};
  }
  const std::vector<double>& row_major() const { return p_; }

  friend bool operator==(const LikelihoodTable& a, const LikelihoodTable& b) {
    return a.states_ == b.states_ && a.signals_ == b.signals_ && a.p_ == b.p_;
  }

 private:
  std::size_t states_;
  std::size_t signals_;
  std::vector<double> p_;
  std::vector<double> log_p_;
};

class WorldModel {
 public:
  // One likelihood table per agent; every table must have one row per state.
  WorldModel(StateSpace states, Prior prior, std::vector<LikelihoodTable> likelihoods);

  const StateSpace& states() const { return states_; }
  const Prior& prior() const { return prior_; }
  std::size_t agent_count() const { return likelihoods_.size(); }
  std::size_t state_count() const { return states_.size(); }
  StateIndex true_state() const { return states_.true_state(); }
  const LikelihoodTable& likelihood(Agent i) const { return likelihoods_.at(i); }

  // Throws ValidationError if s is not in S_i.
  void check_signal(Agent i, Signal s) const;

 private:
  StateSpace states_;
  Prior prior_;
  std::vector<LikelihoodTable> likelihoods_;
};

// Inverse-CDF draw from a discrete distribution with one uniform in [0,1).
// Never returns a zero-probability index.
std::size_t sample_categorical(std::span<const double> probabilities, double u);

// One draw of s_i from l_i(. | true state).
Signal sample_signal(const WorldModel& world, Agent agent, RandomStream& rng);

// Produces the signal vector of one round, one entry per agent. The default
// draws agents independently; a correlated joint distribution can be plugged
// into the simulator through this signature.
using JointSignalSampler = std::function<std::vector<Signal>(
    const WorldModel& world, std::uint64_t master_seed, std::uint64_t round)>;

std::vector<Signal> sample_independent_signals(const WorldModel& world, std::uint64_t master_seed,
                                               std::uint64_t round);

inline constexpr double kInfiniteDivergence = std::numeric_limits<double>::infinity();

// D_KL(p || q) in nats with 0 ln 0 = 0. Returns kInfiniteDivergence when q
// has a zero where p does not. Throws ValidationError on a length mismatch.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// D_KL(l_i(. | a) || l_i(. | b)) > 1e-12.
bool distinguishable(const WorldModel& world, Agent agent, StateIndex a, StateIndex b);

struct IdentifiabilityReport {
  struct FalseState {
    StateIndex state;
    std::vector<Agent> witnesses;  // agents in the set that tell it apart from the truth
  };
  std::vector<FalseState> false_states;
  bool identifiable = true;
};

// For every state other than the truth, which agents in `agents` distinguish it.
IdentifiabilityReport check_global_identifiability(const WorldModel& world,
                                                   std::span<const Agent> agents);

}  // namespace gossip
