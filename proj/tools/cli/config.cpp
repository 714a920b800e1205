#include "cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "gossip/error.hpp"

namespace gossip::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

void require_object(const json& j, const std::string& path, std::initializer_list<const char*> allowed,
                    std::initializer_list<const char*> required) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) ==
        allowed.end()) {
      fail(path, "unknown key '" + key + "'");
    }
  }
  for (const char* key : required) {
    if (!j.contains(key)) fail(path, std::string("missing required key '") + key + "'");
  }
}

std::uint64_t read_uint(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    const auto v = j.get<long long>();
    if (v < 0) fail(path, "must be non-negative");
    return static_cast<std::uint64_t>(v);
  }
  fail(path, "expected a non-negative integer");
}

long long read_int(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) {
    const auto v = j.get<std::uint64_t>();
    if (v > static_cast<std::uint64_t>(std::numeric_limits<long long>::max())) fail(path, "integer too large");
    return static_cast<long long>(v);
  }
  if (j.is_number_integer()) return j.get<long long>();
  fail(path, "expected an integer");
}

double read_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

// Integer labels become their decimal text; strings pass through.
std::string read_label(const json& j, const std::string& path) {
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s.empty()) fail(path, "state label is empty");
    return s;
  }
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  fail(path, "expected a state label (string or integer)");
}

bool is_integer_text(const std::string& s) {
  if (s.empty() || s.size() > 18) return false;
  std::size_t start = s[0] == '-' ? 1 : 0;
  if (start == s.size()) return false;
  if (s.size() - start > 1 && s[start] == '0') return false;
  return std::all_of(s.begin() + static_cast<long>(start), s.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

json write_label(const std::string& label) {
  if (is_integer_text(label)) return std::stoll(label);
  return label;
}

double parse_fraction(const std::string& text, const std::string& path) {
  auto parse_part = [&](std::string_view part) {
    double v = 0.0;
    const auto res = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || res.ec != std::errc{} || res.ptr != part.data() + part.size()) {
      fail(path, "cannot read probability '" + text + "'");
    }
    return v;
  };
  const std::string_view view(text);
  const auto slash = view.find('/');
  if (slash == std::string_view::npos) return parse_part(view);
  const double num = parse_part(view.substr(0, slash));
  const double den = parse_part(view.substr(slash + 1));
  if (den == 0.0) fail(path, "zero denominator in '" + text + "'");
  return num / den;
}

Probability read_probability(const json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), {}};
  if (j.is_string()) {
    const auto text = j.get<std::string>();
    return {parse_fraction(text, path), text};
  }
  fail(path, "expected a probability (number or \"a/b\" string)");
}

json write_probability(const Probability& p) {
  if (!p.text.empty()) return p.text;
  return p.value;
}

std::vector<Probability> read_probability_row(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of probabilities");
  std::vector<Probability> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    out.push_back(read_probability(j[k], path + "[" + std::to_string(k) + "]"));
  }
  return out;
}

ProbabilityRows read_rows(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
  ProbabilityRows out;
  for (std::size_t r = 0; r < j.size(); ++r) {
    out.push_back(read_probability_row(j[r], path + "[" + std::to_string(r) + "]"));
  }
  return out;
}

json write_rows(const ProbabilityRows& rows) {
  json out = json::array();
  for (const auto& row : rows) {
    json r = json::array();
    for (const auto& p : row) r.push_back(write_probability(p));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<double> values(const std::vector<Probability>& row) {
  std::vector<double> out;
  for (const auto& p : row) out.push_back(p.value);
  return out;
}

std::vector<std::vector<double>> values(const ProbabilityRows& rows) {
  std::vector<std::vector<double>> out;
  for (const auto& r : rows) out.push_back(values(r));
  return out;
}

std::string line_context(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t k = 0; k < std::min(byte, text.size()); ++k) {
    if (text[k] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

// Rewraps a core validation error with the config location it came from.
template <typename F>
auto with_context(const std::string& path, F&& build) {
  try {
    return build();
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
}

}  // namespace

ExperimentConfig config_from_json(const json& doc) {
  require_object(doc, "config", {"network", "selection", "world", "simulation", "analysis"},
                 {"network", "world", "simulation"});
  ExperimentConfig cfg;

  {
    const json& j = doc["network"];
    require_object(j, "network", {"agents", "edges"}, {"agents"});
    cfg.network.agents = read_uint(j["agents"], "network.agents");
    if (cfg.network.agents == 0) fail("network.agents", "must be at least 1");
    if (j.contains("edges")) {
      const json& edges = j["edges"];
      if (!edges.is_array()) fail("network.edges", "expected an array of [source, target] pairs");
      for (std::size_t k = 0; k < edges.size(); ++k) {
        const std::string path = "network.edges[" + std::to_string(k) + "]";
        if (!edges[k].is_array() || edges[k].size() != 2) fail(path, "expected [source, target]");
        cfg.network.edges.emplace_back(read_int(edges[k][0], path + "[0]"),
                                       read_int(edges[k][1], path + "[1]"));
      }
    }
  }

  if (doc.contains("selection")) {
    const json& j = doc["selection"];
    require_object(j, "selection", {"kind", "rows"}, {"kind"});
    if (!j["kind"].is_string()) fail("selection.kind", "expected \"uniform\" or \"explicit\"");
    const auto kind = j["kind"].get<std::string>();
    if (kind == "uniform") {
      if (j.contains("rows")) fail("selection.rows", "not allowed with kind \"uniform\"");
    } else if (kind == "explicit") {
      if (!j.contains("rows")) fail("selection", "kind \"explicit\" needs \"rows\"");
      cfg.selection.uniform = false;
      cfg.selection.rows = read_rows(j["rows"], "selection.rows");
    } else {
      fail("selection.kind", "expected \"uniform\" or \"explicit\", got \"" + kind + "\"");
    }
  }

  {
    const json& j = doc["world"];
    require_object(j, "world", {"states", "true_state", "prior", "tables", "likelihoods"},
                   {"states", "true_state", "likelihoods"});
    const json& states = j["states"];
    if (!states.is_array() || states.empty()) fail("world.states", "expected a non-empty array");
    for (std::size_t k = 0; k < states.size(); ++k) {
      cfg.world.states.push_back(read_label(states[k], "world.states[" + std::to_string(k) + "]"));
    }
    cfg.world.true_state = read_label(j["true_state"], "world.true_state");
    if (j.contains("prior")) cfg.world.prior = read_probability_row(j["prior"], "world.prior");
    if (j.contains("tables")) {
      const json& tables = j["tables"];
      if (!tables.is_object()) fail("world.tables", "expected an object of named tables");
      for (const auto& [name, rows] : tables.items()) {
        cfg.world.tables[name] = read_rows(rows, "world.tables." + name);
      }
    }
    const json& likes = j["likelihoods"];
    if (!likes.is_array()) fail("world.likelihoods", "expected one entry per agent");
    for (std::size_t k = 0; k < likes.size(); ++k) {
      const std::string path = "world.likelihoods[" + std::to_string(k) + "]";
      require_object(likes[k], path, {"like", "table"}, {});
      AgentLikelihood entry;
      if (likes[k].contains("like") == likes[k].contains("table")) {
        fail(path, "give exactly one of \"like\" or \"table\"");
      }
      if (likes[k].contains("like")) {
        if (!likes[k]["like"].is_string()) fail(path + ".like", "expected a table name");
        entry.alias = likes[k]["like"].get<std::string>();
      } else {
        entry.table = read_rows(likes[k]["table"], path + ".table");
      }
      cfg.world.likelihoods.push_back(std::move(entry));
    }
  }

  {
    const json& j = doc["simulation"];
    require_object(j, "simulation", {"horizon", "seed", "replications", "record_every"}, {"horizon"});
    cfg.simulation.horizon = read_uint(j["horizon"], "simulation.horizon");
    if (j.contains("seed")) cfg.simulation.seed = read_uint(j["seed"], "simulation.seed");
    if (j.contains("replications")) {
      cfg.simulation.replications = read_uint(j["replications"], "simulation.replications");
    }
    if (j.contains("record_every")) {
      cfg.simulation.record_every = read_uint(j["record_every"], "simulation.record_every");
    }
  }

  if (doc.contains("analysis")) {
    const json& j = doc["analysis"];
    require_object(j, "analysis", {"check_states", "rate_window", "rate_tolerance", "diff_agents"}, {});
    if (j.contains("check_states")) {
      const json& cs = j["check_states"];
      if (!cs.is_array()) fail("analysis.check_states", "expected an array of state labels");
      for (std::size_t k = 0; k < cs.size(); ++k) {
        cfg.analysis.check_states.push_back(
            read_label(cs[k], "analysis.check_states[" + std::to_string(k) + "]"));
      }
    }
    if (j.contains("rate_window")) {
      const json& w = j["rate_window"];
      if (!w.is_array() || w.size() != 2) fail("analysis.rate_window", "expected [begin, end]");
      cfg.analysis.rate_window = RateWindow{read_uint(w[0], "analysis.rate_window[0]"),
                                            read_uint(w[1], "analysis.rate_window[1]")};
    }
    if (j.contains("rate_tolerance")) {
      cfg.analysis.rate_tolerance = read_number(j["rate_tolerance"], "analysis.rate_tolerance");
    }
    if (j.contains("diff_agents")) {
      const json& d = j["diff_agents"];
      if (!d.is_array() || d.size() != 2) fail("analysis.diff_agents", "expected [agent_a, agent_b]");
      cfg.analysis.diff_agents = std::make_pair(read_int(d[0], "analysis.diff_agents[0]"),
                                                read_int(d[1], "analysis.diff_agents[1]"));
    }
  }
  return cfg;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON at " + line_context(text, e.byte == 0 ? 0 : e.byte - 1) +
                      ": " + e.what());
  }
  return config_from_json(doc);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json to_json(const ExperimentConfig& cfg) {
  json doc;
  json edges = json::array();
  for (const auto& [s, t] : cfg.network.edges) edges.push_back({s, t});
  doc["network"] = {{"agents", cfg.network.agents}, {"edges", edges}};

  if (cfg.selection.uniform) {
    doc["selection"] = {{"kind", "uniform"}};
  } else {
    doc["selection"] = {{"kind", "explicit"}, {"rows", write_rows(cfg.selection.rows)}};
  }

  json world;
  json states = json::array();
  for (const auto& s : cfg.world.states) states.push_back(write_label(s));
  world["states"] = states;
  world["true_state"] = write_label(cfg.world.true_state);
  if (cfg.world.prior) {
    json prior = json::array();
    for (const auto& p : *cfg.world.prior) prior.push_back(write_probability(p));
    world["prior"] = prior;
  }
  json tables = json::object();
  for (const auto& [name, rows] : cfg.world.tables) tables[name] = write_rows(rows);
  world["tables"] = tables;
  json likes = json::array();
  for (const auto& l : cfg.world.likelihoods) {
    if (l.alias) {
      likes.push_back({{"like", *l.alias}});
    } else {
      likes.push_back({{"table", write_rows(*l.table)}});
    }
  }
  world["likelihoods"] = likes;
  doc["world"] = world;

  doc["simulation"] = {{"horizon", cfg.simulation.horizon},
                       {"seed", cfg.simulation.seed},
                       {"replications", cfg.simulation.replications},
                       {"record_every", cfg.simulation.record_every}};

  json analysis;
  json checks = json::array();
  for (const auto& s : cfg.analysis.check_states) checks.push_back(write_label(s));
  analysis["check_states"] = checks;
  analysis["rate_tolerance"] = cfg.analysis.rate_tolerance;
  if (cfg.analysis.rate_window) {
    analysis["rate_window"] = {cfg.analysis.rate_window->begin, cfg.analysis.rate_window->end};
  }
  if (cfg.analysis.diff_agents) {
    analysis["diff_agents"] = {cfg.analysis.diff_agents->first, cfg.analysis.diff_agents->second};
  }
  doc["analysis"] = analysis;
  return doc;
}

std::string serialize_config(const ExperimentConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

ExperimentConfig example1_config() {
  ExperimentConfig cfg;
  cfg.network.agents = 8;
  cfg.network.edges = {{1, 2}, {2, 5}, {2, 3}, {3, 4}, {3, 1},
                       {3, 6}, {4, 2}, {1, 7}, {5, 4}, {7, 8}};
  cfg.selection.uniform = true;
  cfg.world.states = {"1", "2", "3"};
  cfg.world.true_state = "1";
  auto p = [](const char* text) { return Probability{parse_fraction(text, "example1"), text}; };
  // Rows are states 1..3; columns are signals 0 and 1.
  cfg.world.tables["l_1"] = {{p("1/3"), p("2/3")}, {p("1/3"), p("2/3")}, {p("1/5"), p("4/5")}};
  cfg.world.tables["l_2"] = {{p("1/2"), p("1/2")}, {p("2/3"), p("1/3")}, {p("1/2"), p("1/2")}};
  cfg.world.tables["l_3"] = {{p("1/4"), p("3/4")}, {p("1/4"), p("3/4")}, {p("1/4"), p("3/4")}};
  cfg.world.likelihoods = {{"l_1", {}}, {"l_2", {}}, {"l_3", {}}, {"l_3", {}},
                           {"l_3", {}}, {"l_3", {}}, {"l_3", {}}, {"l_3", {}}};
  cfg.simulation = {.horizon = 5000, .seed = 42, .record_every = 10, .replications = 20};
  cfg.analysis.check_states = {"2", "3"};
  cfg.analysis.rate_window = RateWindow{1000, 5000};
  cfg.analysis.rate_tolerance = 0.15;
  cfg.analysis.diff_agents = std::make_pair(3LL, 8LL);
  return cfg;
}

Experiment build_experiment(const ExperimentConfig& cfg) {
  DirectedNetwork net = with_context("network", [&] {
    return from_edge_list(cfg.network.agents, cfg.network.edges);
  });
  SelectionMatrix selection = with_context("selection", [&] {
    if (cfg.selection.uniform) return uniform_selection_matrix(net);
    const auto rows = values(cfg.selection.rows);
    return custom_selection_matrix(net, rows);
  });

  WorldModel world = with_context("world", [&] {
    StateSpace states(cfg.world.states, 0);
    const StateIndex truth = with_context("world.true_state", [&] {
      return states.index_of(cfg.world.true_state);
    });
    StateSpace labelled(cfg.world.states, truth);
    Prior prior = cfg.world.prior ? with_context("world.prior", [&] { return Prior(values(*cfg.world.prior)); })
                                  : Prior::uniform(states.size());
    if (cfg.world.likelihoods.size() != cfg.network.agents) {
      fail("world.likelihoods", "has " + std::to_string(cfg.world.likelihoods.size()) +
                                    " entries but the network has " +
                                    std::to_string(cfg.network.agents) + " agents");
    }
    std::map<std::string, LikelihoodTable> named;
    for (const auto& [name, rows] : cfg.world.tables) {
      const auto v = values(rows);
      named.emplace(name, with_context("world.tables." + name,
                                       [&] { return LikelihoodTable::from_rows(v); }));
    }
    std::vector<LikelihoodTable> tables;
    for (std::size_t k = 0; k < cfg.world.likelihoods.size(); ++k) {
      const auto& entry = cfg.world.likelihoods[k];
      const std::string path = "world.likelihoods[" + std::to_string(k) + "]";
      if (entry.alias) {
        const auto it = named.find(*entry.alias);
        if (it == named.end()) fail(path + ".like", "no table named '" + *entry.alias + "'");
        tables.push_back(it->second);
      } else {
        const auto v = values(*entry.table);
        tables.push_back(with_context(path + ".table", [&] { return LikelihoodTable::from_rows(v); }));
      }
    }
    return WorldModel(std::move(labelled), std::move(prior), std::move(tables));
  });

  SimulationConfig simulation = cfg.simulation;
  with_context("simulation", [&] { simulation.validate(); return 0; });

  std::vector<StateIndex> checks;
  if (cfg.analysis.check_states.empty()) {
    for (StateIndex k = 0; k < world.state_count(); ++k) {
      if (k != world.true_state()) checks.push_back(k);
    }
  } else {
    for (const auto& label : cfg.analysis.check_states) {
      const StateIndex k = with_context("analysis.check_states", [&] {
        return world.states().index_of(label);
      });
      if (k == world.true_state()) fail("analysis.check_states", "'" + label + "' is the true state");
      checks.push_back(k);
    }
  }

  const RateWindow window = cfg.analysis.rate_window.value_or(default_rate_window(simulation.horizon));
  if (window.begin > window.end || window.end > simulation.horizon) {
    fail("analysis.rate_window", "must satisfy begin <= end <= simulation.horizon");
  }
  if (!(cfg.analysis.rate_tolerance > 0.0)) fail("analysis.rate_tolerance", "must be positive");

  std::optional<std::pair<Agent, Agent>> diff;
  if (cfg.analysis.diff_agents) {
    const auto [a, b] = *cfg.analysis.diff_agents;
    const auto n = static_cast<long long>(cfg.network.agents);
    if (a < 1 || a > n || b < 1 || b > n) fail("analysis.diff_agents", "agent outside [1, n]");
    diff = std::make_pair(static_cast<Agent>(a - 1), static_cast<Agent>(b - 1));
  }

  return Experiment{std::move(net),       std::move(selection), std::move(world), simulation,
                    std::move(checks),    window,               cfg.analysis.rate_tolerance,
                    diff};
}

}  // namespace gossip::cli
