#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "cli/config.hpp"

namespace gossip::cli {

// Stable process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitNegativeVerdict = 1,  // not identifiable, or a rate outside tolerance
  kExitInputError = 2,       // malformed or invalid input, missing traces
  kExitIoError = 3,
};

inline constexpr const char* kOutputDirEnv = "GOSSIP_OUT_DIR";
inline constexpr const char* kBuiltinExample1 = "@example1";

struct CommandOptions {
  std::optional<std::string> config;  // path, or "@example1" for the built-in scenario
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> traces;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> replications;
  std::optional<std::uint64_t> horizon;
  bool quiet = false;
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

// --out, else $GOSSIP_OUT_DIR, else the given fallback.
std::filesystem::path resolve_output_dir(const CommandOptions& opts, const std::string& fallback);

// Loads --config (or the built-in) and applies --seed/--replications/--horizon.
ExperimentConfig resolve_config(const CommandOptions& opts);

int cmd_check(const CommandOptions& opts, Streams io);
int cmd_run(const CommandOptions& opts, Streams io);
int cmd_rate(const CommandOptions& opts, Streams io);
int cmd_example1(const CommandOptions& opts, Streams io);

}  // namespace gossip::cli
