#include "gossip/belief.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gossip/error.hpp"

namespace gossip {

double BeliefState::probability(StateIndex k) const { return std::exp(log_belief.at(k)); }

std::vector<double> BeliefState::probabilities() const {
  std::vector<double> out(log_belief.size());
  std::transform(log_belief.begin(), log_belief.end(), out.begin(),
                 [](double v) { return std::exp(v); });
  return out;
}

double log_sum_exp(std::span<const double> v) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const double top = v.empty() ? kNegInf : *std::max_element(v.begin(), v.end());
  if (top == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - top);
  return top + std::log(sum);
}

void normalize_log(std::span<double> log_weights) {
  const double total = log_sum_exp(log_weights);
  if (!std::isfinite(total)) {
    throw ImpossibleSignalError("signal has zero probability under every state with positive mass");
  }
  for (double& x : log_weights) x -= total;
}

void bayes_step(const WorldModel& world, Agent agent, Signal s, std::span<const double> log_prior,
                std::span<double> out) {
  const auto& table = world.likelihood(agent);
  const std::size_t k = world.state_count();
  if (log_prior.size() != k || out.size() != k) {
    throw ValidationError("belief vector length does not match the state space");
  }
  // Shift by the largest log-likelihood so an uninformative signal adds
  // exact zeros; a normalised prior then passes through bit for bit instead
  // of picking up rounding from a redundant renormalisation.
  double top = -std::numeric_limits<double>::infinity();
  for (StateIndex state = 0; state < k; ++state) top = std::max(top, table.log(state, s));
  if (top == -std::numeric_limits<double>::infinity()) {
    throw ImpossibleSignalError("signal " + std::to_string(s) + " has zero likelihood under every state for agent " +
                                std::to_string(agent + 1));
  }
  bool flat = true;
  for (StateIndex state = 0; state < k; ++state) {
    const double shifted = table.log(state, s) - top;
    flat = flat && shifted == 0.0;
    out[state] = log_prior[state] + shifted;
  }
  if (flat && std::abs(log_sum_exp(out)) <= kNormalizedSlack) return;
  normalize_log(out);
}

BeliefState initial_belief(const WorldModel& world, Agent agent, Signal s0) {
  world.check_signal(agent, s0);
  std::vector<double> log_prior(world.state_count());
  const auto& nu = world.prior().values();
  std::transform(nu.begin(), nu.end(), log_prior.begin(), [](double v) { return std::log(v); });
  BeliefState out{agent, 0, std::vector<double>(world.state_count())};
  bayes_step(world, agent, s0, log_prior, out.log_belief);
  return out;
}

BeliefState self_update(const WorldModel& world, const BeliefState& belief, Signal s) {
  return gossip_update(world, belief, belief.agent, s);
}

BeliefState gossip_update(const WorldModel& world, const BeliefState& neighbor_belief, Agent agent,
                          Signal s) {
  world.check_signal(agent, s);
  BeliefState out{agent, neighbor_belief.time + 1, std::vector<double>(world.state_count())};
  bayes_step(world, agent, s, neighbor_belief.log_belief, out.log_belief);
  return out;
}

double log_ratio(std::span<const double> log_belief, StateIndex check_state,
                 StateIndex true_state) {
  if (check_state >= log_belief.size() || true_state >= log_belief.size()) {
    throw ValidationError("state index out of range");
  }
  const double reference = log_belief[true_state];
  if (reference == -std::numeric_limits<double>::infinity()) {
    throw ValidationError("reference state has zero belief; log ratio is undefined");
  }
  return log_belief[check_state] - reference;
}

double log_ratio(const BeliefState& belief, StateIndex check_state, StateIndex true_state) {
  return log_ratio(belief.log_belief, check_state, true_state);
}

}  // namespace gossip
