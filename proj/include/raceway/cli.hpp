#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "raceway/config.hpp"
#include "raceway/sim.hpp"
#include "raceway/timeseries.hpp"

// Batch-run artifacts: trajectory/diagnostics CSVs (RFC-4180, CRLF), a
// key = value run summary, long-format plot data, and the two-run comparison
// table.

namespace raceway {

namespace detail {

inline std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

}  // namespace detail

/// Writes content to path via a temporary file + rename, so readers never see
/// a half-written file.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw simulation_error("cannot write file: " + tmp);
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

/// One row per controller period. Cost columns are printed to full precision
/// so downstream sums reproduce the summary exactly.
inline std::string trajectory_csv(const Trajectory& traj) {
  std::string out =
      "timestamp,X,h,T,DO,TIC,pH,mu,Q_air,Q_co2,Q_d,Q_h,"
      "stage_cost,full_cost,cum_cost,cum_full_cost,active\r\n";
  for (const TrajectoryPoint& p : traj.points) {
    out += format_iso8601(p.t);
    out += ',' + detail::fmt("%.12g", p.state.biomass);
    out += ',' + detail::fmt("%.12g", p.state.level);
    out += ',' + detail::fmt("%.12g", p.state.temp);
    out += ',' + detail::fmt("%.12g", p.state.oxygen);
    out += ',' + detail::fmt("%.12g", p.state.tic);
    out += ',' + detail::fmt("%.12g", p.ph);
    out += ',' + detail::fmt("%.12g", p.mu);
    out += ',' + detail::fmt("%.12g", p.input.q_air);
    out += ',' + detail::fmt("%.12g", p.input.q_co2);
    out += ',' + detail::fmt("%.12g", p.input.q_d);
    out += ',' + detail::fmt("%.12g", p.input.q_h);
    out += ',' + detail::fmt("%.17g", p.stage_cost);
    out += ',' + detail::fmt("%.17g", p.full_cost);
    out += ',' + detail::fmt("%.17g", p.cum_cost);
    out += ',' + detail::fmt("%.17g", p.cum_full_cost);
    out += ',';
    out += (p.active ? '1' : '0');
    out += "\r\n";
  }
  return out;
}

/// One row per active EMPC period (header only for other controllers).
inline std::string diagnostics_csv(const Trajectory& traj) {
  std::string out =
      "timestamp,horizon,iterations,status,objective,optimality,"
      "constraint_violation,slack_level_worst,slack_terminal,fallback\r\n";
  for (const EmpcStepRecord& r : traj.diagnostics) {
    out += format_iso8601(r.t);
    out += ',' + std::to_string(r.diag.horizon);
    out += ',' + std::to_string(r.diag.iterations);
    out += ',' + r.diag.status;
    out += ',' + detail::fmt("%.12g", r.diag.objective);
    out += ',' + detail::fmt("%.12g", r.diag.optimality);
    out += ',' + detail::fmt("%.12g", r.diag.constraint_violation);
    out += ',' + detail::fmt("%.12g", r.diag.slack_level_worst);
    out += ',' + detail::fmt("%.12g", r.diag.slack_terminal);
    out += ',';
    out += (r.diag.fallback ? '1' : '0');
    out += "\r\n";
  }
  return out;
}

namespace detail {

/// Eq.-19 / Eq.-17 cost subtotals per calendar day of the run (1-based from
/// the first day containing `start`).
inline std::map<int, std::pair<double, double>> day_subtotals(const Scenario& sc,
                                                             const Trajectory& traj) {
  const std::int64_t day_s = static_cast<std::int64_t>(seconds_per_day);
  const std::int64_t day0 = sc.start / day_s;
  std::map<int, std::pair<double, double>> out;
  for (const TrajectoryPoint& p : traj.points) {
    const int day = static_cast<int>(p.t / day_s - day0) + 1;
    out[day].first += p.stage_cost * traj.ts;
    out[day].second += p.full_cost * traj.ts;
  }
  return out;
}

}  // namespace detail

/// Parseable key = value run summary. Euro figures carry a 4-decimal display
/// key plus a full-precision `_exact` twin used by compare and by tests.
inline std::string summary_text(const Scenario& sc, const Trajectory& traj) {
  std::ostringstream out;
  out << "scenario = " << sc.name << "\n";
  out << "controller = " << sc.controller << "\n";
  out << "forecast = " << (sc.controller == "empc" ? sc.forecast : "-") << "\n";
  out << "start = " << format_iso8601(sc.start) << "\n";
  out << "end = " << format_iso8601(sc.end) << "\n";
  out << "periods = " << traj.points.size() << "\n";
  out << "cost_eq19_total = " << detail::fmt("%.4f", traj.total_cost()) << "\n";
  out << "cost_eq19_total_exact = " << detail::fmt("%.17g", traj.total_cost()) << "\n";
  out << "cost_eq17_total = " << detail::fmt("%.4f", traj.total_full_cost()) << "\n";
  out << "cost_eq17_total_exact = " << detail::fmt("%.17g", traj.total_full_cost())
      << "\n";
  out << "min_level_cm = " << detail::fmt("%.4f", traj.min_level * 100.0) << "\n";

  int level_violations = 0;
  for (const TrajectoryPoint& p : traj.points)
    if (p.state.level < 0.09) ++level_violations;
  out << "level_violations = " << level_violations << "\n";

  const std::vector<double> eod = end_of_day_biomass(traj);
  const double bound = sc.init.biomass - 0.3;
  int terminal_violations = 0;
  double margin_min = std::numeric_limits<double>::infinity();
  for (double x : eod) {
    margin_min = std::min(margin_min, x - bound);
    if (x < bound) ++terminal_violations;
  }
  out << "operating_days = " << eod.size() << "\n";
  if (!eod.empty())
    out << "terminal_margin_min = " << detail::fmt("%.6f", margin_min) << "\n";
  out << "terminal_violations = " << terminal_violations << "\n";

  for (const auto& [day, costs] : detail::day_subtotals(sc, traj)) {
    out << "day_" << day << "_cost_eq19 = " << detail::fmt("%.4f", costs.first) << "\n";
    out << "day_" << day << "_cost_eq17 = " << detail::fmt("%.4f", costs.second) << "\n";
  }
  return out.str();
}

/// Long-format plot data: 9 rows per period, variables in fixed order.
/// Values are the same strings as trajectory_csv would print.
inline std::string plot_data_csv(const Trajectory& traj) {
  if (traj.points.empty())
    throw simulation_error("plot data: trajectory is empty");
  std::string out = "timestamp,variable,value\r\n";
  for (const TrajectoryPoint& p : traj.points) {
    const std::string ts = format_iso8601(p.t);
    const std::pair<const char*, std::string> rows[] = {
        {"DO", detail::fmt("%.12g", p.state.oxygen)},
        {"pH", detail::fmt("%.12g", p.ph)},
        {"X", detail::fmt("%.12g", p.state.biomass)},
        {"h", detail::fmt("%.12g", p.state.level)},
        {"Q_air", detail::fmt("%.12g", p.input.q_air)},
        {"Q_co2", detail::fmt("%.12g", p.input.q_co2)},
        {"Q_d", detail::fmt("%.12g", p.input.q_d)},
        {"Q_h", detail::fmt("%.12g", p.input.q_h)},
        {"stage_cost", detail::fmt("%.17g", p.stage_cost)},
    };
    for (const auto& [name, value] : rows)
      out += ts + ',' + name + ',' + value + "\r\n";
  }
  return out;
}

/// Rebuilds the long-format plot data from an existing trajectory.csv,
/// passing field text through verbatim so the two files match exactly.
inline std::string plot_data_from_csv(const std::string& trajectory_csv_text) {
  std::istringstream in(trajectory_csv_text);
  std::string line;
  bool header = true;
  std::string out = "timestamp,variable,value\r\n";
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto f = detail::split_csv_line(line);
    if (f.size() < 17)
      throw simulation_error("plot data: malformed trajectory row: " + line);
    // columns: 0 timestamp, 1 X, 2 h, 4 DO, 6 pH, 8..11 flows, 12 stage_cost
    const std::pair<const char*, const std::string&> vars[] = {
        {"DO", f[4]},   {"pH", f[6]},   {"X", f[1]},    {"h", f[2]},
        {"Q_air", f[8]}, {"Q_co2", f[9]}, {"Q_d", f[10]}, {"Q_h", f[11]},
        {"stage_cost", f[12]},
    };
    for (const auto& [name, value] : vars)
      out += f[0] + ',' + name + ',' + value + "\r\n";
    ++rows;
  }
  if (rows == 0) throw simulation_error("plot data: trajectory is empty");
  return out;
}

/// Runs a scenario and writes trajectory.csv, diagnostics.csv and summary.txt
/// into out_dir (created if needed).
inline void write_run_outputs(const Scenario& sc, const Trajectory& traj,
                              const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  write_file_atomic((fs::path(out_dir) / "trajectory.csv").string(),
                    trajectory_csv(traj));
  write_file_atomic((fs::path(out_dir) / "diagnostics.csv").string(),
                    diagnostics_csv(traj));
  write_file_atomic((fs::path(out_dir) / "summary.txt").string(),
                    summary_text(sc, traj));
}

/// Parsed summary.txt, as far as compare needs it.
struct RunSummary {
  std::map<std::string, std::string> keys;
  std::map<int, double> day_cost_eq19;

  const std::string& get(const std::string& k) const {
    auto it = keys.find(k);
    if (it == keys.end())
      throw invalid_parameter("summary is missing key '" + k + "'");
    return it->second;
  }
  double num(const std::string& k) const { return std::stod(get(k)); }
};

inline RunSummary read_summary(const std::string& run_dir) {
  const std::string path =
      (std::filesystem::path(run_dir) / "summary.txt").string();
  std::ifstream in(path);
  if (!in) throw invalid_parameter("summary not found: " + path);
  RunSummary s;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string k = detail::trim(line.substr(0, eq));
    const std::string v = detail::trim(line.substr(eq + 1));
    s.keys[k] = v;
    int day = 0;
    if (std::sscanf(k.c_str(), "day_%d_cost_eq19", &day) == 1 &&
        k == "day_" + std::to_string(day) + "_cost_eq19")
      s.day_cost_eq19[day] = std::stod(v);
  }
  if (s.keys.empty()) throw invalid_parameter("summary is empty: " + path);
  return s;
}

/// Side-by-side comparison of two completed runs over the same scenario
/// window. Improvement of A over B is (J_b - J_a)/|J_b|.
inline std::string comparison_table(const RunSummary& a, const RunSummary& b) {
  if (a.get("start") != b.get("start") || a.get("end") != b.get("end"))
    throw invalid_parameter("compare: scenario windows differ (" + a.get("start") +
                            " .. " + a.get("end") + " vs " + b.get("start") + " .. " +
                            b.get("end") + ")");

  auto line = [](const std::string& label, const std::string& va,
                 const std::string& vb) {
    std::ostringstream o;
    o << label;
    for (std::size_t i = label.size(); i < 28; ++i) o << ' ';
    o << va;
    for (std::size_t i = va.size(); i < 22; ++i) o << ' ';
    o << vb << "\n";
    return o.str();
  };
  auto best_worst = [](const RunSummary& s) {
    std::pair<std::string, std::string> out{"-", "-"};
    if (s.day_cost_eq19.empty()) return out;
    auto best = s.day_cost_eq19.begin();
    auto worst = s.day_cost_eq19.begin();
    for (auto it = s.day_cost_eq19.begin(); it != s.day_cost_eq19.end(); ++it) {
      if (it->second < best->second) best = it;
      if (it->second > worst->second) worst = it;
    }
    out.first = "day " + std::to_string(best->first) + " (" +
                detail::fmt("%.4f", best->second) + ")";
    out.second = "day " + std::to_string(worst->first) + " (" +
                 detail::fmt("%.4f", worst->second) + ")";
    return out;
  };

  const auto [best_a, worst_a] = best_worst(a);
  const auto [best_b, worst_b] = best_worst(b);
  std::string out;
  out += line("metric", "run_a", "run_b");
  out += line("scenario", a.get("scenario"), b.get("scenario"));
  out += line("controller", a.get("controller"), b.get("controller"));
  out += line("forecast", a.get("forecast"), b.get("forecast"));
  out += line("window", a.get("start") + " .. " + a.get("end"), "(same)");
  out += line("cost_eq19_total [EUR]", a.get("cost_eq19_total"),
              b.get("cost_eq19_total"));
  out += line("cost_eq17_total [EUR]", a.get("cost_eq17_total"),
              b.get("cost_eq17_total"));
  out += line("best_day [EUR]", best_a, best_b);
  out += line("worst_day [EUR]", worst_a, worst_b);

  const double ja19 = a.num("cost_eq19_total_exact");
  const double jb19 = b.num("cost_eq19_total_exact");
  const double ja17 = a.num("cost_eq17_total_exact");
  const double jb17 = b.num("cost_eq17_total_exact");
  const double imp19 = jb19 == ja19 ? 0.0 : (jb19 - ja19) / std::abs(jb19) * 100.0;
  const double imp17 = jb17 == ja17 ? 0.0 : (jb17 - ja17) / std::abs(jb17) * 100.0;
  out += "improvement_eq19 = " + detail::fmt("%.2f", imp19) + " %\n";
  out += "improvement_eq17 = " + detail::fmt("%.2f", imp17) + " %\n";
  return out;
}

}  // namespace raceway
