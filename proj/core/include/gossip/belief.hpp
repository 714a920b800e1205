#pragma once

// Log-space beliefs and the without-recall Bayes updates.
//
// Every update is "take some prior over the states, multiply by the agent's
// own likelihood of the signal it just saw, renormalise". The three rules
// differ only in whose prior is used: the common prior at t = 0, the agent's
// own previous belief, or a neighbour's previous belief.

#include <cstdint>
#include <span>
#include <vector>

#include "gossip/world.hpp"

namespace gossip {

struct BeliefState {
  Agent agent = 0;
  std::uint64_t time = 0;
  std::vector<double> log_belief;  // normalised: logsumexp == 0

  double probability(StateIndex k) const;
  std::vector<double> probabilities() const;
};

// An input whose log-sum-exp is within this of zero counts as normalised.
inline constexpr double kNormalizedSlack = 1e-14;

// log(sum(exp(v))) with a max shift; -inf if every entry is -inf.
double log_sum_exp(std::span<const double> v);

// In-place normalisation of log weights. Throws ImpossibleSignalError when
// every entry is -inf.
void normalize_log(std::span<double> log_weights);

// Writes normalise(log_prior + log l_i(s | .)) into out. This is the single
// kernel behind every update rule; `out` may alias nothing in log_prior.
void bayes_step(const WorldModel& world, Agent agent, Signal s, std::span<const double> log_prior,
                std::span<double> out);

// t = 0: mu_{i,0} proportional to nu * l_i(s0 | .).
BeliefState initial_belief(const WorldModel& world, Agent agent, Signal s0);

// Isolated or self-selecting agent: own previous belief as the prior.
BeliefState self_update(const WorldModel& world, const BeliefState& belief, Signal s);

// Gossip step: the neighbour's previous belief as the prior, the agent's own
// likelihood for s.
BeliefState gossip_update(const WorldModel& world, const BeliefState& neighbor_belief, Agent agent,
                          Signal s);

// log mu(check_state) - log mu(true_state). May be -inf; throws
// ValidationError if the reference state has zero mass.
double log_ratio(const BeliefState& belief, StateIndex check_state, StateIndex true_state);
double log_ratio(std::span<const double> log_belief, StateIndex check_state, StateIndex true_state);

}  // namespace gossip
