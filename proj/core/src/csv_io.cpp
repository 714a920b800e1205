#include "gossip/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "gossip/error.hpp"

namespace gossip {

namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

double parse_double(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ValidationError("not a number: '" + text + "'");
  }
  return v;
}

namespace {

std::uint64_t parse_uint(const std::string& text) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ValidationError("not a non-negative integer: '" + text + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ofstream open_for_write(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

Agent parse_agent(const std::string& text, std::size_t n) {
  const std::uint64_t a = parse_uint(text);
  if (a < 1 || a > n) throw ValidationError("agent " + text + " outside [1, " + std::to_string(n) + "]");
  return static_cast<Agent>(a - 1);
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return c;
  }
  throw ValidationError("CSV has no column '" + name + "'");
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + " is empty");
  table.header = split(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != table.header.size()) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(table.header.size()) + " fields");
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

void write_csv(const fs::path& path, const CsvTable& table) {
  auto out = open_for_write(path);
  auto emit = [&](const std::vector<std::string>& fields) {
    for (std::size_t c = 0; c < fields.size(); ++c) out << (c ? "," : "") << fields[c];
    out << '\n';
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
  finish(out, path);
}

void write_trace_csv(const SimulationTrace& trace, const WorldModel& world, const fs::path& dir) {
  const std::size_t n = trace.agent_count();
  {
    const fs::path path = dir / "beliefs.csv";
    auto out = open_for_write(path);
    out << "t,agent,state,prob,log_prob\n";
    for (std::uint64_t t : trace.snapshot_times()) {
      for (Agent i = 0; i < n; ++i) {
        const auto lb = trace.log_belief(i, t);
        for (StateIndex k = 0; k < lb.size(); ++k) {
          out << t << ',' << i + 1 << ',' << world.states().label(k) << ','
              << format_double(std::exp(lb[k])) << ',' << format_double(lb[k]) << '\n';
        }
      }
    }
    finish(out, path);
  }
  {
    const fs::path path = dir / "selections.csv";
    auto out = open_for_write(path);
    out << "t,agent,chosen\n";
    for (std::uint64_t t = 1; t <= trace.horizon(); ++t) {
      for (Agent i = 0; i < n; ++i) out << t << ',' << i + 1 << ',' << trace.selection(t, i) + 1 << '\n';
    }
    finish(out, path);
  }
  {
    const fs::path path = dir / "signals.csv";
    auto out = open_for_write(path);
    out << "t,agent,signal\n";
    for (std::uint64_t t = 0; t <= trace.horizon(); ++t) {
      for (Agent i = 0; i < n; ++i) out << t << ',' << i + 1 << ',' << trace.signal(i, t) << '\n';
    }
    finish(out, path);
  }
}

SimulationTrace read_trace_csv(const fs::path& dir, const WorldModel& world, std::uint64_t seed) {
  const std::size_t n = world.agent_count();
  const std::size_t k = world.state_count();

  const CsvTable signals = read_csv(dir / "signals.csv");
  const std::size_t st = signals.column("t"), sa = signals.column("agent"),
                    ss = signals.column("signal");
  std::uint64_t horizon = 0;
  for (const auto& r : signals.rows) horizon = std::max(horizon, parse_uint(r[st]));
  if (horizon == 0) throw ValidationError("signals.csv holds no rounds after t = 0");
  if (signals.rows.size() != (horizon + 1) * n) {
    throw ValidationError("signals.csv does not cover every (t, agent) pair");
  }

  SimulationTrace trace(n, k, world.true_state(), horizon, seed);
  for (const auto& r : signals.rows) {
    const Agent i = parse_agent(r[sa], n);
    const auto s = static_cast<Signal>(parse_uint(r[ss]));
    world.check_signal(i, s);
    trace.set_signal(i, parse_uint(r[st]), s);
  }

  const CsvTable selections = read_csv(dir / "selections.csv");
  const std::size_t ct = selections.column("t"), ca = selections.column("agent"),
                    cc = selections.column("chosen");
  if (selections.rows.size() != horizon * n) {
    throw ValidationError("selections.csv does not cover every (t, agent) pair");
  }
  for (const auto& r : selections.rows) {
    const std::uint64_t t = parse_uint(r[ct]);
    if (t < 1 || t > horizon) throw ValidationError("selection time out of range");
    trace.set_selection(t, parse_agent(r[ca], n), parse_agent(r[cc], n));
  }

  const CsvTable beliefs = read_csv(dir / "beliefs.csv");
  const std::size_t bt = beliefs.column("t"), ba = beliefs.column("agent"),
                    bs = beliefs.column("state"), bl = beliefs.column("log_prob");
  std::vector<double> block(n * k);
  std::uint64_t current = 0;
  std::size_t filled = 0;
  for (const auto& r : beliefs.rows) {
    const std::uint64_t t = parse_uint(r[bt]);
    if (filled > 0 && t != current) {
      if (filled != n * k) throw ValidationError("incomplete belief snapshot at t = " + std::to_string(current));
      trace.add_snapshot(current, block);
      filled = 0;
    }
    current = t;
    block[parse_agent(r[ba], n) * k + world.states().index_of(r[bs])] = parse_double(r[bl]);
    ++filled;
  }
  if (filled > 0) {
    if (filled != n * k) throw ValidationError("incomplete belief snapshot at t = " + std::to_string(current));
    trace.add_snapshot(current, block);
  }
  trace.world_fingerprint = fingerprint(world);
  return trace;
}

void write_rate_report_csv(const RateReport& report, const WorldModel& world, const fs::path& path) {
  auto out = open_for_write(path);
  out << "check_state,theoretical,agent,empirical,stderr\n";
  for (const auto& e : report.entries) {
    for (const auto& a : e.agents) {
      out << world.states().label(e.check_state) << ',' << format_double(e.theoretical) << ','
          << a.agent + 1 << ',' << format_double(a.rate) << ',' << format_double(a.standard_error)
          << '\n';
    }
  }
  finish(out, path);
}

void write_occupancy_csv(const OccupancyReport& report, const fs::path& path) {
  auto out = open_for_write(path);
  out << "agent_m,empirical,stationary\n";
  for (Agent m = 0; m < report.empirical.size(); ++m) {
    out << m + 1 << ',' << format_double(report.empirical[m]) << ','
        << (report.stationary.empty() ? std::string("nan") : format_double(report.stationary[m]))
        << '\n';
  }
  finish(out, path);
}

void write_belief_diff_csv(const std::vector<DifferencePoint>& series, const fs::path& path) {
  auto out = open_for_write(path);
  out << "t,value\n";
  for (const auto& p : series) out << p.t << ',' << format_double(p.value) << '\n';
  finish(out, path);
}

}  // namespace gossip
