#include "gossip/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <thread>

#include "gossip/error.hpp"
#include "gossip/rng.hpp"

namespace gossip {

void SimulationConfig::validate() const {
  if (horizon == 0) throw ValidationError("simulation horizon must be at least 1");
  if (record_every == 0) throw ValidationError("snapshot stride must be at least 1");
  if (replications == 0) throw ValidationError("replications must be at least 1");
}

SimulationTrace::SimulationTrace(std::size_t agents, std::size_t states, StateIndex true_state,
                                 std::uint64_t horizon, std::uint64_t seed)
    : agents_(agents),
      states_(states),
      true_state_(true_state),
      horizon_(horizon),
      seed_(seed),
      signals_((horizon + 1) * agents, 0),
      selections_(horizon * agents, 0) {}

bool SimulationTrace::has_snapshot(std::uint64_t t) const {
  return std::binary_search(snapshot_times_.begin(), snapshot_times_.end(), t);
}

std::size_t SimulationTrace::snapshot_slot(std::uint64_t t) const {
  const auto it = std::lower_bound(snapshot_times_.begin(), snapshot_times_.end(), t);
  if (it == snapshot_times_.end() || *it != t) {
    throw std::out_of_range("no belief snapshot recorded at t = " + std::to_string(t));
  }
  return static_cast<std::size_t>(it - snapshot_times_.begin());
}

std::span<const double> SimulationTrace::log_belief(Agent i, std::uint64_t t) const {
  const std::size_t slot = snapshot_slot(t);
  return {snapshots_.data() + (slot * agents_ + i) * states_, states_};
}

BeliefState SimulationTrace::belief(Agent i, std::uint64_t t) const {
  const auto lb = log_belief(i, t);
  return {i, t, {lb.begin(), lb.end()}};
}

void SimulationTrace::add_snapshot(std::uint64_t t, std::span<const double> log_beliefs) {
  if (log_beliefs.size() != agents_ * states_) {
    throw ValidationError("snapshot has the wrong size");
  }
  if (!snapshot_times_.empty() && t <= snapshot_times_.back()) {
    throw ValidationError("snapshots must be added in increasing time");
  }
  if (t > horizon_) throw ValidationError("snapshot time beyond the horizon");
  snapshot_times_.push_back(t);
  snapshots_.insert(snapshots_.end(), log_beliefs.begin(), log_beliefs.end());
}

namespace {

class Fnv1a {
 public:
  void add(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      hash_ ^= (v >> (8 * b)) & 0xffU;
      hash_ *= 0x100000001b3ULL;
    }
  }
  void add(double v) { add(std::bit_cast<std::uint64_t>(v)); }
  void add(const std::string& s) {
    add(static_cast<std::uint64_t>(s.size()));
    for (unsigned char c : s) {
      hash_ ^= c;
      hash_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

// One synchronous round: next[i] = update(prev[sigma_i], i, s_i).
void advance_round(const WorldModel& world, std::span<const double> prev,
                   std::span<const Signal> signals, std::span<const std::uint32_t> selections,
                   std::span<double> next) {
  const std::size_t k = world.state_count();
  for (Agent i = 0; i < signals.size(); ++i) {
    bayes_step(world, i, signals[i], prev.subspan(selections[i] * k, k), next.subspan(i * k, k));
  }
}

void initial_round(const WorldModel& world, std::span<const Signal> signals,
                   std::span<double> out) {
  const std::size_t k = world.state_count();
  for (Agent i = 0; i < signals.size(); ++i) {
    const BeliefState b = initial_belief(world, i, signals[i]);
    std::copy(b.log_belief.begin(), b.log_belief.end(), out.begin() + i * k);
  }
}

bool should_record(std::uint64_t t, const SimulationConfig& cfg) {
  return t % cfg.record_every == 0 || t == cfg.horizon;
}

}  // namespace

std::uint64_t fingerprint(const WorldModel& world) {
  Fnv1a h;
  h.add(static_cast<std::uint64_t>(world.state_count()));
  for (const auto& label : world.states().labels()) h.add(label);
  h.add(static_cast<std::uint64_t>(world.true_state()));
  for (double v : world.prior().values()) h.add(v);
  h.add(static_cast<std::uint64_t>(world.agent_count()));
  for (Agent i = 0; i < world.agent_count(); ++i) {
    const auto& table = world.likelihood(i);
    h.add(static_cast<std::uint64_t>(table.signal_count()));
    for (double v : table.row_major()) h.add(v);
  }
  return h.value();
}

std::uint64_t fingerprint(const SelectionMatrix& p) {
  Fnv1a h;
  h.add(static_cast<std::uint64_t>(p.size()));
  for (Agent i = 0; i < p.size(); ++i) {
    h.add(static_cast<std::uint64_t>(p.row(i).size()));
    for (const auto& e : p.row(i)) {
      h.add(static_cast<std::uint64_t>(e.column));
      h.add(e.probability);
    }
  }
  return h.value();
}

SimulationTrace run(const DirectedNetwork& net, const SelectionMatrix& p, const WorldModel& world,
                    const SimulationConfig& cfg, const JointSignalSampler& sampler) {
  cfg.validate();
  const std::size_t n = net.size();
  if (p.size() != n || world.agent_count() != n) {
    throw ValidationError("network has " + std::to_string(n) + " agents, selection matrix " +
                          std::to_string(p.size()) + ", world " +
                          std::to_string(world.agent_count()));
  }
  std::vector<std::vector<double>> row_probabilities(n);
  std::vector<std::vector<Agent>> row_columns(n);
  for (Agent i = 0; i < n; ++i) {
    for (const auto& e : p.row(i)) {
      if (e.column != i && !net.has_edge(e.column, i)) {
        throw ValidationError("selection matrix puts mass on a non-neighbour of agent " +
                              std::to_string(i + 1));
      }
      row_probabilities[i].push_back(e.probability);
      row_columns[i].push_back(e.column);
    }
  }

  const std::size_t k = world.state_count();
  SimulationTrace trace(n, k, world.true_state(), cfg.horizon, cfg.seed);
  trace.world_fingerprint = fingerprint(world);
  trace.matrix_fingerprint = fingerprint(p);

  auto draw_signals = [&](std::uint64_t t) {
    std::vector<Signal> s = sampler(world, cfg.seed, t);
    if (s.size() != n) throw ValidationError("signal sampler returned the wrong number of signals");
    for (Agent i = 0; i < n; ++i) {
      world.check_signal(i, s[i]);
      trace.set_signal(i, t, s[i]);
    }
    return s;
  };

  std::vector<double> prev(n * k);
  std::vector<double> next(n * k);
  std::vector<std::uint32_t> chosen(n);

  initial_round(world, draw_signals(0), prev);
  trace.add_snapshot(0, prev);

  for (std::uint64_t t = 1; t <= cfg.horizon; ++t) {
    const std::vector<Signal> signals = draw_signals(t);
    for (Agent i = 0; i < n; ++i) {
      RandomStream rng(substream_seed(cfg.seed, DrawPurpose::kSelection, t, i));
      const std::size_t slot = sample_categorical(row_probabilities[i], rng.uniform());
      chosen[i] = static_cast<std::uint32_t>(row_columns[i][slot]);
      trace.set_selection(t, i, chosen[i]);
    }
    advance_round(world, prev, signals, chosen, next);
    prev.swap(next);
    if (should_record(t, cfg)) trace.add_snapshot(t, prev);
  }
  return trace;
}

std::vector<SimulationTrace> run_replications(const DirectedNetwork& net, const SelectionMatrix& p,
                                              const WorldModel& world, const SimulationConfig& cfg,
                                              unsigned threads) {
  cfg.validate();
  const std::size_t count = cfg.replications;
  std::vector<std::optional<SimulationTrace>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t r = next++; r < count; r = next++) {
      try {
        SimulationConfig one = cfg;
        one.seed = replication_seed(cfg.seed, r);
        one.replications = 1;
        slots[r].emplace(run(net, p, world, one));
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < threads; ++w) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<SimulationTrace> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<Agent> backward_walk(const SimulationTrace& trace, Agent i, std::uint64_t t) {
  if (t > trace.horizon()) throw ValidationError("walk start time beyond the horizon");
  std::vector<Agent> walk;
  walk.reserve(t + 1);
  walk.push_back(i);
  Agent current = i;
  for (std::uint64_t k = 0; k < t; ++k) {
    current = trace.selection(t - k, current);
    walk.push_back(current);
  }
  return walk;
}

namespace {

double signal_log_ratio(const WorldModel& world, Agent m, Signal s, StateIndex check,
                        StateIndex truth) {
  const auto& table = world.likelihood(m);
  return table.log(check, s) - table.log(truth, s);
}

}  // namespace

WalkDecomposition walk_decomposition(const SimulationTrace& trace, const WorldModel& world,
                                     Agent i, std::uint64_t t, StateIndex check_state) {
  const StateIndex truth = trace.true_state();
  WalkDecomposition out;
  out.own_signal = signal_log_ratio(world, i, trace.signal(i, t), check_state, truth);
  out.prior = std::log(world.prior()[check_state]) - std::log(world.prior()[truth]);
  const auto walk = backward_walk(trace, i, t);
  for (std::uint64_t tau = 1; tau <= t; ++tau) {
    const Agent m = walk[tau];
    out.walk += signal_log_ratio(world, m, trace.signal(m, t - tau), check_state, truth);
  }
  return out;
}

double verify_walk_identity(const SimulationTrace& trace, const WorldModel& world, Agent i,
                            std::uint64_t t, StateIndex check_state) {
  const double lhs = log_ratio(trace.log_belief(i, t), check_state, trace.true_state());
  const double rhs = walk_decomposition(trace, world, i, t, check_state).total();
  if (std::isinf(lhs) || std::isinf(rhs) || std::isnan(rhs)) {
    if (lhs == rhs) return 0.0;
    throw ValidationError("walk identity mismatch: one side is infinite (exact match required)");
  }
  return std::abs(lhs - rhs);
}

std::optional<std::uint64_t> replay_mismatch(const SimulationTrace& trace,
                                             const WorldModel& world) {
  const std::size_t n = trace.agent_count();
  const std::size_t k = trace.state_count();
  std::vector<Signal> signals(n);
  std::vector<std::uint32_t> chosen(n);
  std::vector<double> prev(n * k);
  std::vector<double> next(n * k);

  auto matches = [&](std::uint64_t t) {
    for (Agent i = 0; i < n; ++i) {
      const auto recorded = trace.log_belief(i, t);
      if (std::memcmp(recorded.data(), prev.data() + i * k, k * sizeof(double)) != 0) return false;
    }
    return true;
  };

  for (Agent i = 0; i < n; ++i) signals[i] = trace.signal(i, 0);
  initial_round(world, signals, prev);
  if (trace.has_snapshot(0) && !matches(0)) return 0;
  for (std::uint64_t t = 1; t <= trace.horizon(); ++t) {
    for (Agent i = 0; i < n; ++i) {
      signals[i] = trace.signal(i, t);
      chosen[i] = static_cast<std::uint32_t>(trace.selection(t, i));
    }
    advance_round(world, prev, signals, chosen, next);
    prev.swap(next);
    if (trace.has_snapshot(t) && !matches(t)) return t;
  }
  return std::nullopt;
}

}  // namespace gossip
