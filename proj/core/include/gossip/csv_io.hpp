#pragma once

// Plain CSV export/import of traces and analysis reports. UTF-8, comma
// delimited, '.' decimal separator, header row first. Agents are written
// 1-based, states by label, doubles in shortest round-trip form.

#include <filesystem>
#include <string>
#include <vector>

#include "gossip/analysis.hpp"
#include "gossip/simulator.hpp"
#include "gossip/world.hpp"

namespace gossip {

std::string format_double(double v);
double parse_double(const std::string& text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws ValidationError for an unknown column.
  std::size_t column(const std::string& name) const;
};

// Throws IoError if the file cannot be read, ValidationError on ragged rows.
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// beliefs.csv (t, agent, state, prob, log_prob), selections.csv
// (t, agent, chosen), signals.csv (t, agent, signal). Creates dir.
void write_trace_csv(const SimulationTrace& trace, const WorldModel& world,
                     const std::filesystem::path& dir);

// Inverse of write_trace_csv; the horizon is taken from signals.csv.
SimulationTrace read_trace_csv(const std::filesystem::path& dir, const WorldModel& world,
                               std::uint64_t seed);

// rate_report.csv: check_state, theoretical, agent, empirical, stderr.
void write_rate_report_csv(const RateReport& report, const WorldModel& world,
                           const std::filesystem::path& path);
// occupancy.csv: agent_m, empirical, stationary.
void write_occupancy_csv(const OccupancyReport& report, const std::filesystem::path& path);
// belief_diff.csv: t, value.
void write_belief_diff_csv(const std::vector<DifferencePoint>& series,
                           const std::filesystem::path& path);

}  // namespace gossip
