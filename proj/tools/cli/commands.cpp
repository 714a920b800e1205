#include "cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "gossip/analysis.hpp"
#include "gossip/csv_io.hpp"
#include "gossip/error.hpp"
#include "gossip/simulator.hpp"

namespace gossip::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifestName = "manifest.json";
constexpr const char* kManifestFormat = "gossip-trace/1";

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string agent_set(const std::vector<Agent>& agents) {
  std::string out = "{";
  for (std::size_t k = 0; k < agents.size(); ++k) {
    out += (k ? "," : "") + std::to_string(agents[k] + 1);
  }
  return out + "}";
}

std::string replication_dir(std::size_t r, std::size_t total) {
  const std::size_t width = std::max<std::size_t>(3, std::to_string(total - 1).size());
  std::ostringstream name;
  name << "rep_" << std::setw(static_cast<int>(width)) << std::setfill('0') << r;
  return name.str();
}

// Maps exceptions to the exit-code contract.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

struct CheckResult {
  bool identifiable = true;
};

// Structure and identifiability report. Identifiability is judged inside
// every recurrent class, since those are the agents whose signals the
// backward walks keep revisiting.
CheckResult report_structure(const Experiment& exp, std::ostream& out, bool quiet) {
  const auto& world = exp.world;
  const RecurrentStructure rec = recurrent_classes(exp.selection);
  CheckResult result;

  std::ostringstream body;
  body << "agents: " << exp.network.size() << ", edges: " << exp.network.edges().size() << "\n";
  body << "strongly connected: " << (is_strongly_connected(exp.network) ? "yes" : "no") << "\n";
  body << "recurrent classes:";
  for (const auto& c : rec.classes) body << " " << agent_set(c);
  body << "\n";
  std::vector<Agent> transient;
  for (Agent i = 0; i < exp.network.size(); ++i) {
    if (!rec.is_recurrent(i)) transient.push_back(i);
  }
  body << "transient agents: " << (transient.empty() ? "none" : agent_set(transient)) << "\n";
  if (rec.classes.size() == 1) {
    const auto pi = stationary_distribution(exp.selection);
    body << "stationary distribution:";
    for (Agent i = 0; i < pi.size(); ++i) body << " " << format_double(pi[i]);
    body << "\n";
  } else {
    body << "stationary distribution: not unique\n";
  }

  body << "true state: " << world.states().label(world.true_state()) << "\n";
  for (const auto& cls : rec.classes) {
    const auto report = check_global_identifiability(world, cls);
    body << "identifiability within " << agent_set(cls) << ":\n";
    for (const auto& fs : report.false_states) {
      body << "  state " << world.states().label(fs.state) << ": ";
      if (fs.witnesses.empty()) {
        body << "no witness\n";
      } else {
        body << "witnesses " << agent_set(fs.witnesses) << "\n";
      }
    }
    result.identifiable = result.identifiable && report.identifiable;
  }
  if (!quiet) out << body.str();
  out << "verdict: " << (result.identifiable ? "identifiable" : "NOT identifiable") << "\n";
  return result;
}

json build_manifest(const ExperimentConfig& cfg, const std::vector<SimulationTrace>& traces) {
  json reps = json::array();
  for (std::size_t r = 0; r < traces.size(); ++r) {
    reps.push_back({{"index", r},
                    {"seed", traces[r].seed()},
                    {"dir", replication_dir(r, traces.size())},
                    {"world_fingerprint", hex64(traces[r].world_fingerprint)},
                    {"matrix_fingerprint", hex64(traces[r].matrix_fingerprint)}});
  }
  return {{"format", kManifestFormat}, {"config", to_json(cfg)}, {"replications", reps}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

void write_run(const ExperimentConfig& cfg, const Experiment& exp,
               const std::vector<SimulationTrace>& traces, const fs::path& dir) {
  ensure_dir(dir);
  for (std::size_t r = 0; r < traces.size(); ++r) {
    write_trace_csv(traces[r], exp.world, dir / replication_dir(r, traces.size()));
  }
  write_text(dir / kManifestName, build_manifest(cfg, traces).dump(2) + "\n");
}

struct RateOutcome {
  RateReport report;
  bool all_within = true;
  bool identifiable = true;
};

RateOutcome analyse_rates(const Experiment& exp, std::span<const SimulationTrace> traces,
                          std::ostream& out, bool quiet) {
  RateOutcome outcome;
  const auto pi = stationary_distribution(exp.selection);
  outcome.report = rate_report(traces, pi, exp.world, exp.check_states, exp.rate_window);
  const auto& labels = exp.world.states();

  if (!quiet) {
    out << "rates over t in [" << exp.rate_window.begin << ", " << exp.rate_window.end << "], "
        << traces.size() << " replication(s), tolerance " << exp.rate_tolerance * 100.0 << "%\n";
  }
  for (const auto& entry : outcome.report.entries) {
    if (entry.theoretical == 0.0) outcome.identifiable = false;
    out << "state " << labels.label(entry.check_state) << ": theoretical "
        << std::setprecision(7) << entry.theoretical << " nats/round\n";
    for (const auto& a : entry.agents) {
      const bool ok = rate_within_tolerance(a.rate, entry.theoretical, exp.rate_tolerance,
                                            a.standard_error);
      outcome.all_within = outcome.all_within && ok;
      if (!quiet) {
        out << "  agent " << a.agent + 1 << ": empirical " << std::setprecision(7) << a.rate
            << " +/- " << std::setprecision(3) << a.standard_error << "  "
            << (ok ? "ok" : "OUTSIDE TOLERANCE") << "\n";
      }
    }
  }
  if (!outcome.identifiable) {
    out << "warning: truth not identifiable (a theoretical rate is zero)\n";
  }
  out << "rate check: " << (outcome.all_within ? "pass" : "FAIL") << "\n";
  return outcome;
}

// Reads a trace directory written by cmd_run.
struct LoadedRun {
  ExperimentConfig config;
  std::vector<SimulationTrace> traces;
};

LoadedRun load_run(const fs::path& dir) {
  const fs::path manifest_path = dir / kManifestName;
  if (!fs::exists(manifest_path)) {
    throw ValidationError("no " + std::string(kManifestName) + " in " + dir.string() +
                          "; run `gossip run --config <file> --out " + dir.string() + "` first");
  }
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw IoError("cannot read " + manifest_path.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(manifest_path.string() + ": " + e.what());
  }
  if (manifest.value("format", "") != kManifestFormat) {
    throw ValidationError(manifest_path.string() + ": unrecognised manifest format");
  }
  LoadedRun run{config_from_json(manifest.at("config")), {}};
  const Experiment exp = build_experiment(run.config);
  for (const auto& rep : manifest.at("replications")) {
    const fs::path rep_dir = dir / rep.at("dir").get<std::string>();
    if (!fs::exists(rep_dir / "signals.csv")) {
      throw ValidationError("missing traces in " + rep_dir.string() +
                            "; rerun `gossip run` to regenerate them");
    }
    run.traces.push_back(read_trace_csv(rep_dir, exp.world, rep.at("seed").get<std::uint64_t>()));
  }
  return run;
}

void write_fig2(const SimulationTrace& trace, const WorldModel& world, Agent agent,
                const fs::path& path) {
  CsvTable table{{"t", "state", "prob"}, {}};
  for (std::uint64_t t : trace.snapshot_times()) {
    const auto lb = trace.log_belief(agent, t);
    for (StateIndex k = 0; k < lb.size(); ++k) {
      table.rows.push_back({std::to_string(t), world.states().label(k), format_double(std::exp(lb[k]))});
    }
  }
  write_csv(path, table);
}

}  // namespace

fs::path resolve_output_dir(const CommandOptions& opts, const std::string& fallback) {
  if (opts.out) return *opts.out;
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
  return fallback;
}

ExperimentConfig resolve_config(const CommandOptions& opts) {
  if (!opts.config) throw ConfigError("--config is required");
  ExperimentConfig cfg =
      *opts.config == kBuiltinExample1 ? example1_config() : load_config(*opts.config);
  if (opts.seed) cfg.simulation.seed = *opts.seed;
  if (opts.replications) cfg.simulation.replications = *opts.replications;
  if (opts.horizon) {
    cfg.simulation.horizon = *opts.horizon;
    // A configured window that no longer fits falls back to the default.
    if (cfg.analysis.rate_window && cfg.analysis.rate_window->end > *opts.horizon) {
      cfg.analysis.rate_window.reset();
    }
  }
  return cfg;
}

int cmd_check(const CommandOptions& opts, Streams io) {
  return guarded(io.err, [&] {
    const Experiment exp = build_experiment(resolve_config(opts));
    const CheckResult r = report_structure(exp, io.out, opts.quiet);
    return r.identifiable ? kExitOk : kExitNegativeVerdict;
  });
}

int cmd_run(const CommandOptions& opts, Streams io) {
  return guarded(io.err, [&] {
    const ExperimentConfig cfg = resolve_config(opts);
    const Experiment exp = build_experiment(cfg);
    const fs::path dir = resolve_output_dir(opts, "gossip_out");
    const auto traces = run_replications(exp.network, exp.selection, exp.world, exp.simulation);
    write_run(cfg, exp, traces, dir);
    if (!opts.quiet) {
      io.out << "wrote " << traces.size() << " trace set(s), horizon " << exp.simulation.horizon
             << ", to " << dir.string() << "\n";
    }
    return kExitOk;
  });
}

int cmd_rate(const CommandOptions& opts, Streams io) {
  return guarded(io.err, [&] {
    if (opts.traces) {
      const LoadedRun run = load_run(*opts.traces);
      const Experiment exp = build_experiment(run.config);
      const auto outcome = analyse_rates(exp, run.traces, io.out, opts.quiet);
      const fs::path dir = opts.out ? *opts.out : *opts.traces;
      ensure_dir(dir);
      write_rate_report_csv(outcome.report, exp.world, dir / "rate_report.csv");
      return outcome.all_within && outcome.identifiable ? kExitOk : kExitNegativeVerdict;
    }
    if (!opts.config) {
      throw ValidationError("rate needs --traces DIR (from `gossip run`) or --config FILE");
    }
    const Experiment exp = build_experiment(resolve_config(opts));
    const auto traces = run_replications(exp.network, exp.selection, exp.world, exp.simulation);
    const auto outcome = analyse_rates(exp, traces, io.out, opts.quiet);
    const fs::path dir = resolve_output_dir(opts, "gossip_out");
    ensure_dir(dir);
    write_rate_report_csv(outcome.report, exp.world, dir / "rate_report.csv");
    return outcome.all_within && outcome.identifiable ? kExitOk : kExitNegativeVerdict;
  });
}

int cmd_example1(const CommandOptions& opts, Streams io) {
  return guarded(io.err, [&] {
    CommandOptions local = opts;
    local.config = kBuiltinExample1;
    const ExperimentConfig cfg = resolve_config(local);
    const Experiment exp = build_experiment(cfg);
    const fs::path dir = resolve_output_dir(opts, "example1_report");
    ensure_dir(dir);

    std::ostringstream check_text;
    const CheckResult check = report_structure(exp, check_text, false);
    write_text(dir / "check.txt", check_text.str());
    if (!opts.quiet) io.out << check_text.str();

    const auto traces = run_replications(exp.network, exp.selection, exp.world, exp.simulation);
    write_run(cfg, exp, traces, dir);

    const auto outcome = analyse_rates(exp, traces, io.out, opts.quiet);
    write_rate_report_csv(outcome.report, exp.world, dir / "rate_report.csv");

    const SimulationTrace& first = traces.front();
    write_fig2(first, exp.world, 1, dir / "fig2_agent2_beliefs.csv");
    const auto [a, b] = exp.diff_agents.value_or(std::make_pair<Agent, Agent>(2, 7));
    write_belief_diff_csv(belief_difference(first, a, b, exp.world.true_state()),
                          dir / ("fig3_diff_" + std::to_string(a + 1) + "_" + std::to_string(b + 1) + ".csv"));
    const auto pi = stationary_distribution(exp.selection);
    write_occupancy_csv(occupancy(first, exp.network.size() - 1, first.horizon(), &pi),
                        dir / "occupancy.csv");

    if (!opts.quiet) io.out << "report written to " << dir.string() << "\n";
    return check.identifiable && outcome.all_within ? kExitOk : kExitNegativeVerdict;
  });
}

}  // namespace gossip::cli
