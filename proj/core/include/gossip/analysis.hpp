#pragma once

// Learning-rate and random-walk analytics over simulation traces.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "gossip/graph.hpp"
#include "gossip/simulator.hpp"
#include "gossip/world.hpp"

namespace gossip {

// sum_m pi_m * D_KL(l_m(. | truth) || l_m(. | check_state)), nats per round.
double theoretical_rate(const StationaryDistribution& pi, const WorldModel& world,
                        StateIndex check_state);

struct RateWindow {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;

  friend bool operator==(const RateWindow&, const RateWindow&) = default;
};

// Skips the first 20% of the horizon.
RateWindow default_rate_window(std::uint64_t horizon);

struct SlopeEstimate {
  double slope = 0.0;
  double standard_error = 0.0;
  std::size_t points = 0;
};

// Ordinary least squares of y on x.
SlopeEstimate least_squares_slope(std::span<const double> x, std::span<const double> y);

// OLS slope of log mu_{i,t}(check)/mu_{i,t}(truth) against t over the
// recorded snapshots in [window.begin, window.end]. Expected to approach
// -theoretical_rate. Throws ValidationError if the window has fewer than two
// snapshots or meets a -inf ratio (shrink the window: the state has exactly
// zero mass there).
SlopeEstimate empirical_rate(const SimulationTrace& trace, Agent agent, StateIndex check_state,
                             RateWindow window);

// Same slope fitted to the walk decomposition instead of the stored beliefs.
SlopeEstimate decomposed_rate(const SimulationTrace& trace, const WorldModel& world, Agent agent,
                              StateIndex check_state, RateWindow window);

struct AgentRate {
  Agent agent = 0;
  double rate = 0.0;        // -mean slope, nats per round
  double standard_error = 0.0;
};

struct RateReport {
  struct Entry {
    StateIndex check_state = 0;
    double theoretical = 0.0;
    std::vector<AgentRate> agents;
  };
  std::vector<Entry> entries;
  RateWindow window;
  std::uint64_t horizon = 0;
  std::size_t replications = 0;
};

// Averages per-replication slopes. The standard error is the spread of the
// replication slopes over sqrt(R); with a single replication it falls back to
// that run's OLS standard error.
RateReport rate_report(std::span<const SimulationTrace> traces, const StationaryDistribution& pi,
                       const WorldModel& world, std::span<const StateIndex> check_states,
                       RateWindow window);

// |estimate - theory| / theory <= tolerance. A zero theoretical rate has no
// relative scale, so there the estimate must lie within three standard errors
// of zero.
bool rate_within_tolerance(double estimate, double theoretical, double tolerance,
                           double standard_error);

struct OccupancyReport {
  Agent start = 0;
  std::uint64_t steps = 0;
  std::vector<double> empirical;   // fraction of tau in [1, t] with i_tau = m
  std::vector<double> stationary;  // pi_m, empty if not supplied
};

OccupancyReport occupancy(const SimulationTrace& trace, Agent agent, std::uint64_t t,
                          const StationaryDistribution* pi = nullptr);

struct DifferencePoint {
  std::uint64_t t = 0;
  double value = 0.0;
};

// |mu_{a,t}(state) - mu_{b,t}(state)| at every recorded snapshot.
std::vector<DifferencePoint> belief_difference(const SimulationTrace& trace, Agent a, Agent b,
                                               StateIndex state);

}  // namespace gossip
