#include "gossip/world.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "gossip/error.hpp"

namespace gossip {

namespace {

void check_distribution(std::span<const double> p, const std::string& what) {
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ValidationError(what + " has a negative or non-finite entry");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kProbabilityTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << " sums to " << sum << ", not 1";
    throw ValidationError(msg.str());
  }
}

}  // namespace

StateSpace::StateSpace(std::vector<std::string> labels, StateIndex true_state)
    : labels_(std::move(labels)), true_state_(true_state) {
  if (labels_.empty()) throw ValidationError("state space is empty");
  std::set<std::string> unique(labels_.begin(), labels_.end());
  if (unique.size() != labels_.size()) throw ValidationError("state labels are not unique");
  if (true_state_ >= labels_.size()) throw ValidationError("true state index out of range");
}

StateIndex StateSpace::index_of(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw ValidationError("unknown state label '" + label + "'");
  return static_cast<StateIndex>(it - labels_.begin());
}

Prior::Prior(std::vector<double> nu) : nu_(std::move(nu)) {
  if (nu_.empty()) throw ValidationError("prior is empty");
  for (double v : nu_) {
    if (!(v > 0.0)) throw ValidationError("prior must be strictly positive on every state");
  }
  check_distribution(nu_, "prior");
}

Prior Prior::uniform(std::size_t states) {
  return Prior(std::vector<double>(states, 1.0 / static_cast<double>(states)));
}

LikelihoodTable::LikelihoodTable(std::size_t states, std::size_t signals,
                                 std::vector<double> row_major)
    : states_(states), signals_(signals), p_(std::move(row_major)) {
  if (states_ == 0 || signals_ == 0) throw ValidationError("likelihood table is empty");
  if (p_.size() != states_ * signals_) {
    throw ValidationError("likelihood table has the wrong number of entries");
  }
  for (StateIndex k = 0; k < states_; ++k) {
    check_distribution(row(k), "likelihood row " + std::to_string(k + 1));
  }
  log_p_.resize(p_.size());
  std::transform(p_.begin(), p_.end(), log_p_.begin(), [](double v) { return std::log(v); });
}

LikelihoodTable LikelihoodTable::from_rows(std::span<const std::vector<double>> rows) {
  if (rows.empty()) throw ValidationError("likelihood table has no rows");
  const std::size_t signals = rows.front().size();
  std::vector<double> flat;
  for (const auto& r : rows) {
    if (r.size() != signals) throw ValidationError("likelihood rows have different lengths");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return LikelihoodTable(rows.size(), signals, std::move(flat));
}

WorldModel::WorldModel(StateSpace states, Prior prior, std::vector<LikelihoodTable> likelihoods)
    : states_(std::move(states)), prior_(std::move(prior)), likelihoods_(std::move(likelihoods)) {
  if (prior_.size() != states_.size()) {
    throw ValidationError("prior length does not match the number of states");
  }
  if (likelihoods_.empty()) throw ValidationError("world has no agents");
  for (Agent i = 0; i < likelihoods_.size(); ++i) {
    if (likelihoods_[i].state_count() != states_.size()) {
      throw ValidationError("likelihood table of agent " + std::to_string(i + 1) + " has " +
                            std::to_string(likelihoods_[i].state_count()) + " rows, expected " +
                            std::to_string(states_.size()));
    }
  }
}

void WorldModel::check_signal(Agent i, Signal s) const {
  if (i >= agent_count()) throw ValidationError("agent index out of range");
  if (s >= likelihood(i).signal_count()) {
    throw ValidationError("signal " + std::to_string(s) + " is outside the signal space of agent " +
                          std::to_string(i + 1));
  }
}

std::size_t sample_categorical(std::span<const double> probabilities, double u) {
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < probabilities.size(); ++k) {
    if (probabilities[k] <= 0.0) continue;
    last_positive = k;
    cumulative += probabilities[k];
    if (u < cumulative) return k;
  }
  // u landed in the rounding slack above the final cumulative sum.
  return last_positive;
}

Signal sample_signal(const WorldModel& world, Agent agent, RandomStream& rng) {
  const auto& table = world.likelihood(agent);
  return static_cast<Signal>(sample_categorical(table.row(world.true_state()), rng.uniform()));
}

std::vector<Signal> sample_independent_signals(const WorldModel& world, std::uint64_t master_seed,
                                               std::uint64_t round) {
  std::vector<Signal> out(world.agent_count());
  for (Agent i = 0; i < out.size(); ++i) {
    RandomStream rng(substream_seed(master_seed, DrawPurpose::kSignal, round, i));
    out[i] = sample_signal(world, i, rng);
  }
  return out;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw ValidationError("kl_divergence: distributions have lengths " + std::to_string(p.size()) +
                          " and " + std::to_string(q.size()));
  }
  double d = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] <= 0.0) continue;
    if (q[k] <= 0.0) return kInfiniteDivergence;
    d += p[k] * std::log(p[k] / q[k]);
  }
  // Rounding can leave a tiny negative for equal inputs.
  return std::max(d, 0.0);
}

bool distinguishable(const WorldModel& world, Agent agent, StateIndex a, StateIndex b) {
  const auto& table = world.likelihood(agent);
  return kl_divergence(table.row(a), table.row(b)) > kDistinguishTolerance;
}

IdentifiabilityReport check_global_identifiability(const WorldModel& world,
                                                   std::span<const Agent> agents) {
  IdentifiabilityReport report;
  const StateIndex truth = world.true_state();
  for (StateIndex k = 0; k < world.state_count(); ++k) {
    if (k == truth) continue;
    IdentifiabilityReport::FalseState entry{k, {}};
    for (Agent m : agents) {
      if (distinguishable(world, m, truth, k)) entry.witnesses.push_back(m);
    }
    std::sort(entry.witnesses.begin(), entry.witnesses.end());
    if (entry.witnesses.empty()) report.identifiable = false;
    report.false_states.push_back(std::move(entry));
  }
  return report;
}

}  // namespace gossip
