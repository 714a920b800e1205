#include <iostream>

#include <CLI11.hpp>

#include "cli/commands.hpp"

namespace {

void add_common(CLI::App* cmd, gossip::cli::CommandOptions& opts) {
  cmd->add_option("--config", opts.config, "Experiment config (JSON), or @example1 for the built-in");
  cmd->add_option("--out", opts.out, "Output directory (default: $GOSSIP_OUT_DIR)");
  cmd->add_option("--seed", opts.seed, "Override simulation.seed");
  cmd->add_option("--replications", opts.replications, "Override simulation.replications");
  cmd->add_option("--horizon", opts.horizon, "Override simulation.horizon");
  cmd->add_flag("--quiet", opts.quiet, "Print verdict lines only");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace gossip::cli;

  CLI::App app{"Gossip-without-recall simulator and learning-rate analysis"};
  app.require_subcommand(1);

  CommandOptions opts;
  auto* check = app.add_subcommand("check", "Connectivity, recurrent classes and identifiability");
  auto* run = app.add_subcommand("run", "Simulate and write CSV traces plus a manifest");
  auto* rate = app.add_subcommand("rate", "Theoretical vs empirical learning rates");
  auto* example1 = app.add_subcommand("example1", "Full pipeline on the built-in 8-agent scenario");
  for (auto* cmd : {check, run, rate, example1}) add_common(cmd, opts);
  rate->add_option("--traces", opts.traces, "Trace directory written by `run`");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  const Streams io{std::cout, std::cerr};
  if (*check) return cmd_check(opts, io);
  if (*run) return cmd_run(opts, io);
  if (*rate) return cmd_rate(opts, io);
  return cmd_example1(opts, io);
}
