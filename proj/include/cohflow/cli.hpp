// Copyright 2026 The cohflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Command implementations behind the `cohflow` executable. Argument parsing
// lives in tools/cohflow.cpp; everything here works on a parsed RunSpec and
// writes to caller-supplied streams so it can be exercised in-process.
//
// Exit codes: 0 success (detect: no backflow), 1 detect found backflow,
// 2 usage error, 3 post-selection impossible, 4 validation failure.

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cohflow/backflow.hpp"
#include "cohflow/channel.hpp"
#include "cohflow/control.hpp"
#include "cohflow/validation.hpp"

namespace cohflow::cli {

enum class Command { evolve, distance, detect, threshold, scan, validate };
enum class Format { csv, json };

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int backflow = 1;
inline constexpr int usage = 2;
inline constexpr int postselection = 3;
inline constexpr int validation = 4;
}  // namespace exit_code

inline constexpr std::size_t kMaxScanCells = 1'000'000;

struct RunSpec {
  Command command = Command::evolve;
  Mode mode = Mode::bare;
  std::optional<double> a;
  double p = 1.0;
  std::optional<double> t;
  double t_min = kDefaultTMin;
  double t_max = kDefaultTMax;
  std::optional<std::size_t> points;
  std::vector<double> input;  ///< 4 real entries or 8 (re, im) pairs, row-major
  Outcome outcome = Outcome::plus;
  Format format = Format::csv;
  double eps = kBackflowEpsilon;
  // scan
  std::size_t a_points = 50;
  std::size_t p_points = 50;
  std::vector<double> a_values;
  std::vector<double> p_values;
  unsigned threads = 0;
  // validate
  std::string suite = "all";
  double kraus_perturbation = 0.0;
};

/// %.15g with negative zero folded to zero.
inline std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", x + 0.0);
  return buf;
}

/// The same value rounded to 15 significant digits, for JSON output.
inline double round15(double x) { return std::strtod(format_number(x).c_str(), nullptr); }

namespace detail {

inline void write_json(std::ostream& out, const nlohmann::json& j) { out << j.dump(2) << '\n'; }

inline DensityOperator input_state(const RunSpec& spec) {
  if (!spec.input.empty()) {
    if (spec.input.size() == 4)
      return DensityOperator(ComplexMatrix(2, {spec.input[0], spec.input[1], spec.input[2],
                                               spec.input[3]}));
    if (spec.input.size() == 8) {
      std::vector<complex> e(4);
      for (std::size_t i = 0; i < 4; ++i) e[i] = complex(spec.input[2 * i], spec.input[2 * i + 1]);
      return DensityOperator(ComplexMatrix(2, std::move(e)));
    }
    throw DomainError("--input takes 4 real entries or 8 re,im values (row-major)");
  }
  if (spec.a) return StatePairParams(*spec.a).states().second;
  return DensityOperator::pure(basis::zero);
}

inline std::optional<ControlConfig> control_config(const RunSpec& spec) {
  switch (spec.mode) {
    case Mode::bare: return std::nullopt;
    case Mode::path: return ControlConfig::path(spec.p, AmplitudeVectors::standard(), spec.outcome);
    case Mode::switch_: return ControlConfig::switched(spec.p, spec.outcome);
  }
  return std::nullopt;
}

inline double require_a(const RunSpec& spec) {
  if (!spec.a) throw DomainError("--a is required for this command");
  return *spec.a;
}

inline std::string fmt_bool(bool b) { return b ? "true" : "false"; }

}  // namespace detail

inline int cmd_evolve(const RunSpec& spec, std::ostream& out) {
  const auto rho0 = detail::input_state(spec);
  const auto config = detail::control_config(spec);
  std::vector<double> times;
  if (spec.t) {
    times = {*spec.t};
  } else {
    const std::size_t n = spec.points.value_or(101);
    if (n < 2) throw DomainError("--points must be at least 2");
    for (std::size_t i = 0; i < n; ++i) times.push_back(spec.t_max * double(i) / double(n - 1));
  }

  static const char* names[] = {"rho00", "rho01", "rho10", "rho11"};
  nlohmann::json rows = nlohmann::json::array();
  if (spec.format == Format::csv) {
    out << "t";
    for (const char* n : names) out << ',' << n << "_re," << n << "_im";
    out << ",probability\n";
  }
  for (double t : times) {
    std::optional<PostSelectedState> result;
    if (config)
      result.emplace(controlled_output(*config, rho0, t));
    else
      result.emplace(PostSelectedState{apply(phi_t_kraus(t), rho0), 1.0});
    const auto& m = result->state.matrix();
    if (spec.format == Format::csv) {
      out << format_number(t);
      for (const auto& z : m.entries())
        out << ',' << format_number(z.real()) << ',' << format_number(z.imag());
      out << ',' << format_number(result->probability) << '\n';
    } else {
      nlohmann::json rho = nlohmann::json::array();
      for (const auto& z : m.entries()) rho.push_back({round15(z.real()), round15(z.imag())});
      rows.push_back({{"t", round15(t)}, {"rho", rho}, {"probability", round15(result->probability)}});
    }
  }
  if (spec.format == Format::json)
    detail::write_json(out, {{"command", "evolve"},
                             {"mode", to_string(spec.mode)},
                             {"p", round15(spec.p)},
                             {"outcome", to_string(spec.outcome)},
                             {"rows", rows}});
  return exit_code::ok;
}

inline TimeGrid sample_grid(const RunSpec& spec) {
  if (spec.t) return TimeGrid({*spec.t});
  return TimeGrid::logarithmic(spec.t_min, spec.t_max, spec.points.value_or(kDefaultTimePoints));
}

inline int cmd_distance(const RunSpec& spec, std::ostream& out) {
  const double a = detail::require_a(spec);
  const auto grid = sample_grid(spec);
  DetectOptions options;
  options.cross_check = false;
  const auto report = detect_backflow(detail::control_config(spec), a, grid, options);
  if (spec.format == Format::csv) {
    out << "t,distance\n";
    for (std::size_t i = 0; i < report.times.size(); ++i)
      out << format_number(report.times[i]) << ',' << format_number(report.distance[i]) << '\n';
  } else {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < report.times.size(); ++i)
      rows.push_back({{"t", round15(report.times[i])}, {"distance", round15(report.distance[i])}});
    detail::write_json(out, {{"command", "distance"},
                             {"mode", to_string(spec.mode)},
                             {"a", round15(a)},
                             {"p", round15(spec.p)},
                             {"rows", rows}});
  }
  return exit_code::ok;
}

inline int cmd_detect(const RunSpec& spec, std::ostream& out) {
  const double a = detail::require_a(spec);
  DetectOptions options;
  options.eps = spec.eps;
  const auto report = detect_backflow(detail::control_config(spec), a, sample_grid(spec), options);
  if (spec.format == Format::csv) {
    out << "# config=" << report.config << " a=" << format_number(a)
        << " p=" << format_number(report.p) << " eps=" << format_number(spec.eps) << '\n';
    out << "# verdict=" << detail::fmt_bool(report.verdict)
        << " marginal=" << detail::fmt_bool(report.marginal)
        << " persistent=" << detail::fmt_bool(report.persistent)
        << " max_dDdt=" << format_number(report.max_derivative) << '\n';
    out << "# intervals=";
    for (std::size_t i = 0; i < report.backflow_intervals.size(); ++i) {
      const auto& iv = report.backflow_intervals[i];
      out << (i ? ";" : "") << format_number(iv.t_start) << ':' << format_number(iv.t_end);
    }
    out << '\n' << "t,distance,dDdt,backflow\n";
    for (std::size_t i = 0; i < report.times.size(); ++i)
      out << format_number(report.times[i]) << ',' << format_number(report.distance[i]) << ','
          << format_number(report.derivative[i]) << ','
          << (report.derivative[i] > spec.eps ? 1 : 0) << '\n';
  } else {
    nlohmann::json rows = nlohmann::json::array(), intervals = nlohmann::json::array();
    for (std::size_t i = 0; i < report.times.size(); ++i)
      rows.push_back({{"t", round15(report.times[i])},
                      {"distance", round15(report.distance[i])},
                      {"dDdt", round15(report.derivative[i])}});
    for (const auto& iv : report.backflow_intervals)
      intervals.push_back({round15(iv.t_start), round15(iv.t_end)});
    detail::write_json(out, {{"command", "detect"},
                             {"mode", report.config},
                             {"a", round15(a)},
                             {"p", round15(report.p)},
                             {"eps", round15(spec.eps)},
                             {"verdict", report.verdict},
                             {"marginal", report.marginal},
                             {"persistent", report.persistent},
                             {"max_dDdt", round15(report.max_derivative)},
                             {"intervals", intervals},
                             {"rows", rows}});
  }
  return report.verdict ? exit_code::backflow : exit_code::ok;
}

inline int cmd_threshold(const RunSpec& spec, std::ostream& out) {
  const double value = asymptotic_threshold(spec.mode, spec.p);
  if (spec.format == Format::csv)
    out << format_number(value) << '\n';
  else
    detail::write_json(out, {{"command", "threshold"},
                             {"mode", to_string(spec.mode)},
                             {"p", round15(spec.p)},
                             {"threshold", round15(value)}});
  return exit_code::ok;
}

inline std::vector<double> scan_a_grid(const RunSpec& spec) {
  if (!spec.a_values.empty()) return spec.a_values;
  std::vector<double> g;
  for (std::size_t i = 1; i <= spec.a_points; ++i) g.push_back(double(i) / double(spec.a_points));
  return g;
}

inline std::vector<double> scan_p_grid(const RunSpec& spec) {
  if (!spec.p_values.empty()) return spec.p_values;
  if (spec.p_points == 1) return {1.0};
  std::vector<double> g;
  for (std::size_t j = 0; j < spec.p_points; ++j) g.push_back(double(j) / double(spec.p_points - 1));
  return g;
}

inline int cmd_scan(const RunSpec& spec, std::ostream& out) {
  auto a_grid = scan_a_grid(spec);
  auto p_grid = scan_p_grid(spec);
  if (a_grid.empty() || p_grid.empty()) throw DomainError("scan grids must be non-empty");
  if (a_grid.size() * p_grid.size() > kMaxScanCells)
    throw DomainError("scan grid has " + std::to_string(a_grid.size() * p_grid.size()) +
                      " cells, limit is " + std::to_string(kMaxScanCells));
  ScanOptions options;
  options.t_min = spec.t_min;
  options.t_max = spec.t_max;
  options.time_points = spec.points.value_or(kDefaultTimePoints);
  options.eps = spec.eps;
  options.threads = spec.threads;
  const auto scan = scan_region(std::move(a_grid), std::move(p_grid), options);

  nlohmann::json cells = nlohmann::json::array();
  if (spec.format == Format::csv) out << "a,p,path,switch\n";
  for (std::size_t ip = 0; ip < scan.p_grid.size(); ++ip)
    for (std::size_t ia = 0; ia < scan.a_grid.size(); ++ia) {
      const double a = scan.a_grid[ia], p = scan.p_grid[ip];
      if (spec.format == Format::csv)
        out << format_number(a) << ',' << format_number(p) << ','
            << detail::fmt_bool(scan.path(ia, ip)) << ',' << detail::fmt_bool(scan.switched(ia, ip))
            << '\n';
      else
        cells.push_back({{"a", round15(a)},
                         {"p", round15(p)},
                         {"path", scan.path(ia, ip)},
                         {"switch", scan.switched(ia, ip)}});
    }
  if (spec.format == Format::json)
    detail::write_json(out, {{"command", "scan"},
                             {"t_max", round15(spec.t_max)},
                             {"eps", round15(spec.eps)},
                             {"cells", cells}});
  return exit_code::ok;
}

inline int cmd_validate(const RunSpec& spec, std::ostream& out) {
  validation::Options options;
  if (spec.t) options.ode_times = {*spec.t};
  options.kraus_perturbation = spec.kraus_perturbation;
  const auto checks = validation::run_suite(spec.suite, options);
  bool all = true;
  nlohmann::json rows = nlohmann::json::array();
  if (spec.format == Format::csv) out << "suite,check,value,limit,status\n";
  for (const auto& c : checks) {
    all = all && c.passed;
    if (spec.format == Format::csv)
      out << c.suite << ',' << c.name << ',' << format_number(c.value) << ','
          << format_number(c.limit) << ',' << (c.passed ? "PASS" : "FAIL") << '\n';
    else
      rows.push_back({{"suite", c.suite},
                      {"check", c.name},
                      {"value", round15(c.value)},
                      {"limit", round15(c.limit)},
                      {"passed", c.passed}});
  }
  if (spec.format == Format::json)
    detail::write_json(out, {{"command", "validate"}, {"passed", all}, {"checks", rows}});
  return all ? exit_code::ok : exit_code::validation;
}

/// Dispatches a parsed spec; maps library errors onto exit codes and reports
/// them on err.
inline int run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    switch (spec.command) {
      case Command::evolve: return cmd_evolve(spec, out);
      case Command::distance: return cmd_distance(spec, out);
      case Command::detect: return cmd_detect(spec, out);
      case Command::threshold: return cmd_threshold(spec, out);
      case Command::scan: return cmd_scan(spec, out);
      case Command::validate: return cmd_validate(spec, out);
    }
  } catch (const PostSelectionError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::postselection;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::usage;
  }
  return exit_code::usage;
}

}  // namespace cohflow::cli
