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

// Trace-distance dynamics of the probe pair {|0>, a|0> + sqrt(1-a^2)|1>},
// closed-form derivatives, information-backflow detection, asymptotic
// thresholds and (a, p) region scans.
//
// All closed forms are evaluated in u = exp(-2t) after cancelling the leading
// powers of exp(2t); the results are algebraically identical to the usual
// expressions in exp(2t) and stay finite for arbitrarily large t.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cohflow/channel.hpp"
#include "cohflow/control.hpp"
#include "cohflow/matrix.hpp"

namespace cohflow {

inline constexpr double kBackflowEpsilon = 1e-9;
inline constexpr double kFiniteDifferenceStep = 1e-4;
inline constexpr double kDefaultTMax = 12.0;
inline constexpr double kDefaultTMin = 1e-2;
inline constexpr std::size_t kDefaultTimePoints = 600;

/// rho1 = |0><0|, rho2 = |psi><psi| with |psi> = a|0> + sqrt(1 - a^2)|1>.
struct StatePairParams {
  double a;

  explicit StatePairParams(double a_) : a(a_) {
    if (!(a > 0.0 && a <= 1.0))
      throw DomainError("probe parameter a must lie in (0, 1], got " + std::to_string(a));
  }

  double b() const { return std::sqrt(std::max(0.0, 1.0 - a * a)); }

  std::pair<DensityOperator, DensityOperator> states() const {
    return {DensityOperator::pure(basis::zero), DensityOperator::pure(Qubit{a, b()})};
  }
};

// ---------------------------------------------------------------- bare map

/// D(t) = 1/2 e^{-2t} sqrt((1-a^2)(4 - 3a^2 + 2a^2 e^{2t} + a^2 e^{4t}))
inline double bare_distance(double a, double t) {
  const StatePairParams pair(a);
  const double u = std::exp(-2.0 * t), a2 = a * a;
  return 0.5 * pair.b() * std::sqrt((4.0 - 3.0 * a2) * u * u + 2.0 * a2 * u + a2);
}

/// dD/dt = sqrt(1-a^2) e^{-2t} (3a^2 - a^2 e^{2t} - 4) / sqrt(4 + 2a^2 e^{2t} + a^2 e^{4t} - 3a^2)
inline double bare_dDdt(double a, double t) {
  const StatePairParams pair(a);
  const double u = std::exp(-2.0 * t), a2 = a * a;
  return pair.b() * u * (3.0 * a2 * u - a2 - 4.0 * u) /
         std::sqrt((4.0 - 3.0 * a2) * u * u + 2.0 * a2 * u + a2);
}

// -------------------------------------------------------- controlled maps

/// dD/dt = prefactor * bracket. Both factors are rescaled by a positive power
/// of e^{2t} relative to the textbook form (prefactor * e^{2kt},
/// bracket * e^{-2kt}), so signs are those of the unscaled bracket.
struct DerivativeTerms {
  double prefactor;
  double bracket;
  double value() const { return prefactor * bracket; }
};

/// Path control with noisy control:
///   xi_I [(p+2)(p e^{2t} - p - 4) - a^2 (p+1)(p e^{2t} + 2 e^{2t} - p - 6)],
///   xi_I = 16 sqrt(1-a^2) e^{2t} / ((p e^{2t} + 4 e^{2t} - p)^2
///          sqrt(4a^2(p+1)(2e^{2t} + e^{4t} - 3) + (p e^{2t} - p - 4)^2)).
/// The bracket here is divided by e^{2t}.
inline DerivativeTerms path_derivative_terms(double a, double p, double t) {
  const StatePairParams pair(a);
  detail::check_time_and_p(t, p);
  const double u = std::exp(-2.0 * t), a2 = a * a;
  const double den = (p + 4.0) - p * u;
  const double root = std::sqrt(4.0 * a2 * (p + 1.0) * (1.0 + 2.0 * u - 3.0 * u * u) +
                                std::pow(p - (p + 4.0) * u, 2));
  const double prefactor = 16.0 * pair.b() * u / (den * den * root);
  const double bracket = (p + 2.0) * (p - (p + 4.0) * u) -
                         a2 * (p + 1.0) * ((p + 2.0) - (p + 6.0) * u);
  return {prefactor, bracket};
}

inline double analytic_dDdt_path(double a, double p, double t) {
  return path_derivative_terms(a, p, t).value();
}

/// The unscaled path bracket, (p+2)(p e^{2t} - p - 4) - a^2 (p+1)(p e^{2t} + 2 e^{2t} - p - 6).
inline double path_bracket(double a, double p, double t) {
  const double e = std::exp(2.0 * t), a2 = a * a;
  return (p + 2.0) * (p * e - p - 4.0) - a2 * (p + 1.0) * (p * e + 2.0 * e - p - 6.0);
}

/// Maximally coherent (p = 1) path bracket, 14a^2 - 15 - 3(2a^2 - 1) e^{2t}.
inline double path_bracket_coherent(double a, double t) {
  const double a2 = a * a;
  return 14.0 * a2 - 15.0 - 3.0 * (2.0 * a2 - 1.0) * std::exp(2.0 * t);
}

/// Maximally coherent path derivative Gamma_I [14a^2 - 15 - 3(2a^2-1) e^{2t}],
/// Gamma_I = 16 sqrt(1-a^2) e^{2t} / ((5e^{2t} - 1)^2 sqrt(8a^2(e^{4t} + 2e^{2t} - 3) + (e^{2t} - 5)^2)).
inline double analytic_dDdt_path_coherent(double a, double t) {
  const StatePairParams pair(a);
  const double u = std::exp(-2.0 * t), a2 = a * a;
  const double root =
      std::sqrt(8.0 * a2 * (1.0 + 2.0 * u - 3.0 * u * u) + std::pow(1.0 - 5.0 * u, 2));
  const double gamma = 16.0 * pair.b() * u / (std::pow(5.0 - u, 2) * root);
  return gamma * ((14.0 * a2 - 15.0) * u - 3.0 * (2.0 * a2 - 1.0));
}

/// Coefficients A1..A5 of the switch polynomial
///   A1 e^{8t} + A2 e^{6t} + A3 e^{4t} + A4 e^{2t} + A5.
/// The a^2 (4p^2 + 15p + 15) contribution sits in A4 (the e^{2t} term).
inline std::array<double, 5> switch_polynomial_coefficients(double a, double p) {
  const double a2 = a * a;
  return {2.0 * p * p - a2 * (3.0 * p + 2.0),
          -2.0 * (a2 * (p + 1.0) * (4.0 * p + 3.0) - 4.0 * p),
          6.0 * (a2 * (2.0 * p * p + 2.0 * p - 1.0) - 2.0 * p * (p + 2.0)),
          2.0 * a2 * (4.0 * p * p + 15.0 * p + 15.0) - 8.0 * (p * (2.0 * p + 5.0) + 4.0),
          p * (a2 * (4.0 * p + 7.0) - 6.0 * p - 8.0)};
}

/// Switch with noisy control: xi_S (A1 e^{8t} + ... + A5),
///   xi_S = 8 sqrt(1-a^2)(p+1) e^{2t} / [2p e^{2t} + (3p+4) e^{4t} - p]^2
///          / sqrt(a^2(p+1)(3e^{2t} + e^{4t} + e^{6t} - 5)(3p e^{2t} + e^{2t} + p + 3)
///                 + [p(e^{2t} - 3)(e^{2t} + 1) - 4]^2).
/// The bracket here is divided by e^{8t}.
inline DerivativeTerms switch_derivative_terms(double a, double p, double t) {
  const StatePairParams pair(a);
  detail::check_time_and_p(t, p);
  const double u = std::exp(-2.0 * t), a2 = a * a;
  const double den = (3.0 * p + 4.0) + 2.0 * p * u - p * u * u;
  const double radicand =
      a2 * (p + 1.0) * (1.0 + u + 3.0 * u * u - 5.0 * u * u * u) * ((3.0 * p + 1.0) + (p + 3.0) * u) +
      std::pow(p * (1.0 - 3.0 * u) * (1.0 + u) - 4.0 * u * u, 2);
  const double prefactor = 8.0 * pair.b() * (p + 1.0) * u / (den * den * std::sqrt(radicand));
  const auto c = switch_polynomial_coefficients(a, p);
  const double bracket = (((c[4] * u + c[3]) * u + c[2]) * u + c[1]) * u + c[0];
  return {prefactor, bracket};
}

inline double analytic_dDdt_switch(double a, double p, double t) {
  return switch_derivative_terms(a, p, t).value();
}

/// Maximally coherent switch bracket 8(1-a^2) sinh 2t - (2-a^2)(3 cosh 2t + 1).
inline double switch_bracket_coherent(double a, double t) {
  const double a2 = a * a;
  return 8.0 * (1.0 - a2) * std::sinh(2.0 * t) - (2.0 - a2) * (3.0 * std::cosh(2.0 * t) + 1.0);
}

inline double analytic_dDdt(Mode mode, double a, double p, double t) {
  switch (mode) {
    case Mode::bare: return bare_dDdt(a, t);
    case Mode::path: return analytic_dDdt_path(a, p, t);
    case Mode::switch_: return analytic_dDdt_switch(a, p, t);
  }
  return 0.0;
}

/// Trace distance of the post-selected probe pair from the closed-form states.
inline double analytic_distance(Mode mode, double a, double p, double t) {
  if (mode == Mode::bare) return bare_distance(a, t);
  const auto [rho1, rho2] = StatePairParams(a).states();
  if (mode == Mode::path)
    return trace_distance(analytic_state_path(rho1, t, p), analytic_state_path(rho2, t, p));
  return trace_distance(analytic_state_switch(rho1, t, p), analytic_state_switch(rho2, t, p));
}

/// Trace distance of the probe pair evolved by the Kraus map (bare) or by the
/// explicit supermap with post-selection.
inline double simulated_distance(const std::optional<ControlConfig>& config, double a, double t) {
  const auto [rho1, rho2] = StatePairParams(a).states();
  if (!config) {
    const auto phi = phi_t_kraus(t);
    return trace_distance(apply(phi, rho1), apply(phi, rho2));
  }
  const auto phi = phi_t_kraus(t);
  const auto joint = supermap_kraus(*config, phi, phi);
  return trace_distance(postselect(*config, joint, rho1).state,
                        postselect(*config, joint, rho2).state);
}

/// Asymptotic (t -> infinity) condition for backflow: a < sqrt(p/(1+p)) for
/// path control, a < sqrt(2p^2/(3p+2)) for the switch.
inline double asymptotic_threshold(Mode mode, double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw DomainError("control coherence p must lie in [0, 1], got " + std::to_string(p));
  switch (mode) {
    case Mode::path: return std::sqrt(p / (1.0 + p));
    case Mode::switch_: return std::sqrt(2.0 * p * p / (3.0 * p + 2.0));
    case Mode::bare: break;
  }
  throw DomainError("asymptotic_threshold: mode must be path or switch");
}

// --------------------------------------------------------------- detection

class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> times) : times_(std::move(times)) {
    if (times_.empty()) throw DomainError("time grid is empty");
    if (!(times_.front() > 0.0)) throw DomainError("time grid must start at t > 0");
    for (std::size_t i = 1; i < times_.size(); ++i)
      if (!(times_[i] > times_[i - 1])) throw DomainError("time grid must be strictly increasing");
    if (!std::isfinite(times_.back())) throw DomainError("time grid must be finite");
  }

  static TimeGrid logarithmic(double t_min = kDefaultTMin, double t_max = kDefaultTMax,
                              std::size_t points = kDefaultTimePoints) {
    if (!(t_min > 0.0 && t_max > t_min) || points < 2)
      throw DomainError("logarithmic grid needs 0 < t_min < t_max and >= 2 points");
    std::vector<double> t(points);
    const double lo = std::log(t_min), step = (std::log(t_max) - lo) / double(points - 1);
    for (std::size_t i = 0; i < points; ++i) t[i] = std::exp(lo + step * double(i));
    t.front() = t_min;
    t.back() = t_max;
    return TimeGrid(std::move(t));
  }

  static TimeGrid linear(double t_min, double t_max, std::size_t points) {
    if (!(t_max > t_min) || points < 2)
      throw DomainError("linear grid needs t_min < t_max and >= 2 points");
    std::vector<double> t(points);
    for (std::size_t i = 0; i < points; ++i)
      t[i] = t_min + (t_max - t_min) * double(i) / double(points - 1);
    return TimeGrid(std::move(t));
  }

  const std::vector<double>& times() const noexcept { return times_; }
  std::size_t size() const noexcept { return times_.size(); }

 private:
  std::vector<double> times_;
};

struct DetectOptions {
  double eps = kBackflowEpsilon;
  double fd_step = kFiniteDifferenceStep;
  bool compute_distance = true;
  /// Also central-difference the distance at every sample and record the
  /// largest disagreement with the analytic derivative.
  bool cross_check = true;
};

struct BackflowInterval {
  double t_start;
  double t_end;
};

struct BackflowReport {
  std::string config;  ///< "bare", "path" or "switch"
  double a = 0.0;
  double p = 1.0;
  std::vector<double> times;
  std::vector<double> distance;            ///< empty unless requested
  std::vector<double> derivative;          ///< analytic where available
  std::vector<double> numeric_derivative;  ///< central differences, if cross-checked
  std::vector<BackflowInterval> backflow_intervals;
  bool verdict = false;
  /// 0 < max dD/dt < 10 eps: positive growth that is at or barely above the
  /// tolerance, i.e. a point on the region edge.
  bool marginal = false;
  /// dD/dt > 0 at the last grid time, i.e. backflow survives into the late-time regime.
  bool persistent = false;
  double max_derivative = 0.0;
  double max_cross_check_error = 0.0;
};

namespace detail {

inline void finalize_report(BackflowReport& report, double eps) {
  const auto& t = report.times;
  const auto& d = report.derivative;
  report.max_derivative = *std::max_element(d.begin(), d.end());
  report.verdict = report.max_derivative > eps;
  report.marginal = report.max_derivative > 0.0 && report.max_derivative < 10.0 * eps;
  report.persistent = d.back() > 0.0;
  std::optional<std::size_t> open;
  for (std::size_t i = 0; i <= d.size(); ++i) {
    const bool above = i < d.size() && d[i] > eps;
    if (above && !open) open = i;
    if (!above && open) {
      report.backflow_intervals.push_back({t[*open], t[i - 1]});
      open.reset();
    }
  }
}

}  // namespace detail

/// Samples D(t) and dD/dt on the grid for the bare map (config == nullopt) or
/// a controlled configuration and flags every run of samples with
/// dD/dt > eps. Closed forms are used when they exist (bare, or standard
/// amplitudes with the "+" outcome); otherwise the distance comes from the
/// explicit supermap and the derivative from central differences.
inline BackflowReport detect_backflow(const std::optional<ControlConfig>& config, double a,
                                      const TimeGrid& grid, const DetectOptions& options = {}) {
  const StatePairParams pair(a);
  if (config) config->validate();
  const Mode mode = config ? config->mode : Mode::bare;
  const double p = config ? config->control.p() : 1.0;
  const bool closed_form = !config || config->has_closed_form();
  const double h = options.fd_step;

  std::function<double(double)> distance_at;
  if (closed_form)
    distance_at = [&](double t) { return analytic_distance(mode, a, p, t); };
  else
    distance_at = [&](double t) { return simulated_distance(config, a, t); };

  BackflowReport report;
  report.config = std::string(to_string(mode));
  report.a = a;
  report.p = p;
  report.times = grid.times();
  const std::size_t n = grid.size();
  report.derivative.resize(n);
  if (options.compute_distance) report.distance.resize(n);
  const bool need_fd = !closed_form || options.cross_check;
  if (need_fd) report.numeric_derivative.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const double t = report.times[i];
    if (options.compute_distance) report.distance[i] = distance_at(t);
    if (need_fd) {
      const double lo = std::max(0.0, t - h), hi = t + h;
      report.numeric_derivative[i] = (distance_at(hi) - distance_at(lo)) / (hi - lo);
    }
    report.derivative[i] = closed_form ? analytic_dDdt(mode, a, p, t) : report.numeric_derivative[i];
    if (closed_form && need_fd)
      report.max_cross_check_error =
          std::max(report.max_cross_check_error,
                   std::abs(report.derivative[i] - report.numeric_derivative[i]));
  }
  detail::finalize_report(report, options.eps);
  return report;
}

/// Convenience overload with standard amplitudes and the "+" outcome.
inline BackflowReport detect_backflow(Mode mode, double a, double p, const TimeGrid& grid,
                                      const DetectOptions& options = {}) {
  std::optional<ControlConfig> config;
  if (mode == Mode::path) config = ControlConfig::path(p);
  if (mode == Mode::switch_) config = ControlConfig::switched(p);
  return detect_backflow(config, a, grid, options);
}

// ------------------------------------------------------------------- scans

struct RegionScan {
  std::vector<double> a_grid;
  std::vector<double> p_grid;
  /// Row-major, p-major: index = ip * a_grid.size() + ia.
  std::vector<std::uint8_t> backflow_path;
  std::vector<std::uint8_t> backflow_switch;

  std::size_t index(std::size_t ia, std::size_t ip) const { return ip * a_grid.size() + ia; }
  bool path(std::size_t ia, std::size_t ip) const { return backflow_path[index(ia, ip)] != 0; }
  bool switched(std::size_t ia, std::size_t ip) const {
    return backflow_switch[index(ia, ip)] != 0;
  }
};

struct ScanOptions {
  double t_min = kDefaultTMin;
  double t_max = kDefaultTMax;
  std::size_t time_points = kDefaultTimePoints;
  double eps = kBackflowEpsilon;
  unsigned threads = 0;  ///< 0: hardware concurrency
};

namespace detail {

/// Runs body(i) for i in [0, count) on a pool of threads; each index is
/// written by exactly one worker, so results are order independent.
template <typename Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
}

}  // namespace detail

/// Backflow verdicts for both configurations on every (a, p) cell over a
/// logarithmic time grid.
inline RegionScan scan_region(std::vector<double> a_grid, std::vector<double> p_grid,
                              const ScanOptions& options = {}) {
  for (double a : a_grid)
    if (!(a > 0.0 && a <= 1.0)) throw DomainError("scan_region: a values must lie in (0, 1]");
  for (double p : p_grid)
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("scan_region: p values must lie in [0, 1]");
  const auto grid = TimeGrid::logarithmic(options.t_min, options.t_max, options.time_points);
  DetectOptions detect;
  detect.eps = options.eps;
  detect.compute_distance = false;
  detect.cross_check = false;

  RegionScan scan{std::move(a_grid), std::move(p_grid), {}, {}};
  const std::size_t cells = scan.a_grid.size() * scan.p_grid.size();
  scan.backflow_path.assign(cells, 0);
  scan.backflow_switch.assign(cells, 0);
  detail::parallel_for(cells, options.threads, [&](std::size_t k) {
    const double a = scan.a_grid[k % scan.a_grid.size()];
    const double p = scan.p_grid[k / scan.a_grid.size()];
    scan.backflow_path[k] = detect_backflow(Mode::path, a, p, grid, detect).verdict;
    scan.backflow_switch[k] = detect_backflow(Mode::switch_, a, p, grid, detect).verdict;
  });
  return scan;
}

struct BoundaryOptions {
  double a_step = 5e-4;
  double t_min = kDefaultTMin;
  double t_max = kDefaultTMax;
  std::size_t time_points = kDefaultTimePoints;
  double eps = kBackflowEpsilon;
};

/// Empirical edges of the backflow region at fixed p, scanning a = k * a_step < 1.
struct BoundaryEstimate {
  /// Largest a whose derivative is still positive at t_max.
  std::optional<double> late_time;
  /// Largest a with any sample dD/dt > eps on the grid.
  std::optional<double> full_window;
};

inline BoundaryEstimate backflow_boundary(Mode mode, double p, const BoundaryOptions& options = {}) {
  if (mode == Mode::bare) throw DomainError("backflow_boundary: mode must be path or switch");
  const auto grid = TimeGrid::logarithmic(options.t_min, options.t_max, options.time_points);
  DetectOptions detect;
  detect.eps = options.eps;
  detect.compute_distance = false;
  detect.cross_check = false;
  BoundaryEstimate est;
  const auto steps = static_cast<std::size_t>(std::ceil(1.0 / options.a_step)) - 1;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double a = options.a_step * double(k);
    if (a >= 1.0) break;
    const auto report = detect_backflow(mode, a, p, grid, detect);
    if (report.persistent) est.late_time = a;
    if (report.verdict) est.full_window = a;
  }
  return est;
}

}  // namespace cohflow
