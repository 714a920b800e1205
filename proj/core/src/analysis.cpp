#include "gossip/analysis.hpp"

#include <cmath>
#include <numeric>

#include "gossip/belief.hpp"
#include "gossip/error.hpp"

namespace gossip {

double theoretical_rate(const StationaryDistribution& pi, const WorldModel& world,
                        StateIndex check_state) {
  if (pi.size() != world.agent_count()) {
    throw ValidationError("stationary distribution length does not match the number of agents");
  }
  const StateIndex truth = world.true_state();
  double rate = 0.0;
  for (Agent m = 0; m < pi.size(); ++m) {
    if (pi[m] == 0.0) continue;
    const auto& table = world.likelihood(m);
    rate += pi[m] * kl_divergence(table.row(truth), table.row(check_state));
  }
  return rate;
}

RateWindow default_rate_window(std::uint64_t horizon) { return {horizon / 5, horizon}; }

SlopeEstimate least_squares_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw ValidationError("slope fit: x and y lengths differ");
  if (n < 2) throw ValidationError("slope fit needs at least two points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (sxx == 0.0) throw ValidationError("slope fit: x values are all equal");
  SlopeEstimate out;
  out.slope = sxy / sxx;
  out.points = n;
  if (n > 2) {
    double rss = 0.0;
    const double intercept = my - out.slope * mx;
    for (std::size_t k = 0; k < n; ++k) {
      const double r = y[k] - intercept - out.slope * x[k];
      rss += r * r;
    }
    out.standard_error = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  }
  return out;
}

namespace {

template <typename ValueAt>
SlopeEstimate windowed_slope(const SimulationTrace& trace, RateWindow window, ValueAt value_at) {
  if (window.end > trace.horizon() || window.begin > window.end) {
    throw ValidationError("rate window [" + std::to_string(window.begin) + ", " +
                          std::to_string(window.end) + "] does not fit the horizon " +
                          std::to_string(trace.horizon()));
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::uint64_t t : trace.snapshot_times()) {
    if (t < window.begin || t > window.end) continue;
    const double y = value_at(t);
    if (!std::isfinite(y)) {
      throw ValidationError("log belief ratio is -inf at t = " + std::to_string(t) +
                            "; the state has exactly zero mass there, shrink the rate window");
    }
    xs.push_back(static_cast<double>(t));
    ys.push_back(y);
  }
  if (xs.size() < 2) {
    throw ValidationError("rate window holds fewer than two belief snapshots");
  }
  return least_squares_slope(xs, ys);
}

}  // namespace

SlopeEstimate empirical_rate(const SimulationTrace& trace, Agent agent, StateIndex check_state,
                             RateWindow window) {
  return windowed_slope(trace, window, [&](std::uint64_t t) {
    return log_ratio(trace.log_belief(agent, t), check_state, trace.true_state());
  });
}

SlopeEstimate decomposed_rate(const SimulationTrace& trace, const WorldModel& world, Agent agent,
                              StateIndex check_state, RateWindow window) {
  return windowed_slope(trace, window, [&](std::uint64_t t) {
    return walk_decomposition(trace, world, agent, t, check_state).total();
  });
}

RateReport rate_report(std::span<const SimulationTrace> traces, const StationaryDistribution& pi,
                       const WorldModel& world, std::span<const StateIndex> check_states,
                       RateWindow window) {
  if (traces.empty()) throw ValidationError("rate report needs at least one trace");
  RateReport report;
  report.window = window;
  report.horizon = traces.front().horizon();
  report.replications = traces.size();
  const auto replications = static_cast<double>(traces.size());

  for (StateIndex check : check_states) {
    if (check == world.true_state()) {
      throw ValidationError("check state must differ from the true state");
    }
    RateReport::Entry entry;
    entry.check_state = check;
    entry.theoretical = theoretical_rate(pi, world, check);
    for (Agent i = 0; i < world.agent_count(); ++i) {
      std::vector<double> rates;
      double single_se = 0.0;
      for (const auto& trace : traces) {
        const SlopeEstimate est = empirical_rate(trace, i, check, window);
        rates.push_back(-est.slope);
        single_se = est.standard_error;
      }
      AgentRate ar;
      ar.agent = i;
      ar.rate = std::accumulate(rates.begin(), rates.end(), 0.0) / replications;
      if (rates.size() > 1) {
        double ss = 0.0;
        for (double r : rates) ss += (r - ar.rate) * (r - ar.rate);
        ar.standard_error = std::sqrt(ss / (replications - 1.0)) / std::sqrt(replications);
      } else {
        ar.standard_error = single_se;
      }
      entry.agents.push_back(ar);
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

bool rate_within_tolerance(double estimate, double theoretical, double tolerance,
                           double standard_error) {
  if (theoretical == 0.0) return std::abs(estimate) <= 3.0 * standard_error + 1e-12;
  return std::abs(estimate - theoretical) <= tolerance * std::abs(theoretical);
}

OccupancyReport occupancy(const SimulationTrace& trace, Agent agent, std::uint64_t t,
                          const StationaryDistribution* pi) {
  if (t == 0) throw ValidationError("occupancy needs at least one step");
  const auto walk = backward_walk(trace, agent, t);
  OccupancyReport out;
  out.start = agent;
  out.steps = t;
  out.empirical.assign(trace.agent_count(), 0.0);
  for (std::uint64_t tau = 1; tau <= t; ++tau) out.empirical[walk[tau]] += 1.0;
  for (double& v : out.empirical) v /= static_cast<double>(t);
  if (pi != nullptr) out.stationary = pi->pi;
  return out;
}

std::vector<DifferencePoint> belief_difference(const SimulationTrace& trace, Agent a, Agent b,
                                               StateIndex state) {
  std::vector<DifferencePoint> out;
  out.reserve(trace.snapshot_times().size());
  for (std::uint64_t t : trace.snapshot_times()) {
    const double pa = std::exp(trace.log_belief(a, t)[state]);
    const double pb = std::exp(trace.log_belief(b, t)[state]);
    out.push_back({t, std::abs(pa - pb)});
  }
  return out;
}

}  // namespace gossip
