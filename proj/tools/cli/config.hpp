#pragma once

// Experiment configuration: strict JSON schema, canonical serialisation and
// conversion to the core domain types.
//
//   {
//     "network":    {"agents": 8, "edges": [[1, 2], ...]},        1-based
//     "selection":  {"kind": "uniform"} | {"kind": "explicit", "rows": [[...], ...]},
//     "world": {
//       "states": [1, 2, 3], "true_state": 1, "prior": [...],     prior optional (uniform)
//       "tables": {"l_1": [[p(s=0|1), p(s=1|1)], ...]},           named, shareable
//       "likelihoods": [{"like": "l_1"}, {"table": [[...]]}, ...] one per agent
//     },
//     "simulation": {"horizon": 5000, "seed": 42, "replications": 20, "record_every": 10},
//     "analysis":   {"check_states": [2, 3], "rate_window": [1000, 5000],
//                    "rate_tolerance": 0.15, "diff_agents": [3, 8]}
//   }
//
// Probabilities may be JSON numbers or exact fractions written as strings
// ("1/3"); the string form is kept verbatim through a round trip.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gossip/analysis.hpp"
#include "gossip/error.hpp"
#include "gossip/graph.hpp"
#include "gossip/simulator.hpp"
#include "gossip/world.hpp"

namespace gossip::cli {

// Validation failure annotated with the config location it came from.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct Probability {
  double value = 0.0;
  std::string text;  // verbatim fraction, empty when given as a number

  friend bool operator==(const Probability&, const Probability&) = default;
};

using ProbabilityRows = std::vector<std::vector<Probability>>;

struct AgentLikelihood {
  std::optional<std::string> alias;
  std::optional<ProbabilityRows> table;

  friend bool operator==(const AgentLikelihood&, const AgentLikelihood&) = default;
};

struct ExperimentConfig {
  struct Network {
    std::size_t agents = 0;
    std::vector<std::pair<long long, long long>> edges;
    friend bool operator==(const Network&, const Network&) = default;
  } network;

  struct Selection {
    bool uniform = true;
    ProbabilityRows rows;
    friend bool operator==(const Selection&, const Selection&) = default;
  } selection;

  struct World {
    std::vector<std::string> states;
    std::string true_state;
    std::optional<std::vector<Probability>> prior;
    std::map<std::string, ProbabilityRows> tables;
    std::vector<AgentLikelihood> likelihoods;
    friend bool operator==(const World&, const World&) = default;
  } world;

  SimulationConfig simulation;

  struct Analysis {
    std::vector<std::string> check_states;  // empty: every false state
    std::optional<RateWindow> rate_window;  // empty: default_rate_window
    double rate_tolerance = 0.15;
    std::optional<std::pair<long long, long long>> diff_agents;
    friend bool operator==(const Analysis&, const Analysis&) = default;
  } analysis;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Throws ConfigError (with line/column for syntax errors, a field path for
// schema errors). Unknown keys are rejected.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

nlohmann::json to_json(const ExperimentConfig& cfg);
// Canonical text: keys sorted, two-space indent, trailing newline.
std::string serialize_config(const ExperimentConfig& cfg);

// The eight-agent, three-state scenario with binary signals: agents 1 and 2
// each separate one false state from the truth, everyone else is
// uninformative, neighbours picked uniformly.
ExperimentConfig example1_config();

// Validated domain objects built from a config.
struct Experiment {
  DirectedNetwork network;
  SelectionMatrix selection;
  WorldModel world;
  SimulationConfig simulation;
  std::vector<StateIndex> check_states;
  RateWindow rate_window;
  double rate_tolerance;
  std::optional<std::pair<Agent, Agent>> diff_agents;
};

Experiment build_experiment(const ExperimentConfig& cfg);

}  // namespace gossip::cli
