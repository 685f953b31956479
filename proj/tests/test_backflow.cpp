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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cohflow/backflow.hpp"

using namespace cohflow;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double central_difference(Mode mode, double a, double p, double t, double h = 1e-4) {
  return (analytic_distance(mode, a, p, t + h) - analytic_distance(mode, a, p, t - h)) / (2 * h);
}

std::optional<ControlConfig> config_for(Mode mode, double p) {
  if (mode == Mode::bare) return std::nullopt;
  return mode == Mode::path ? ControlConfig::path(p) : ControlConfig::switched(p);
}

}  // namespace

TEST_CASE("probe pair parameters", "[backflow]") {
  CHECK_THROWS_AS(StatePairParams(0.0), DomainError);
  CHECK_THROWS_AS(StatePairParams(1.2), DomainError);
  const auto [r1, r2] = StatePairParams(0.6).states();
  CHECK_THAT(r2(0, 1).real(), WithinAbs(0.48, 1e-15));
  CHECK_THAT(trace_distance(r1, r2), WithinAbs(0.8, 1e-14));
}

TEST_CASE("bare map: distance and monotone decay", "[backflow]") {
  CHECK_THAT(bare_distance(0.65, 0.0), WithinAbs(std::sqrt(1 - 0.65 * 0.65), 1e-14));
  CHECK_THAT(bare_distance(1.0, 3.0), WithinAbs(0.0, 1e-15));
  for (double a : {0.1, 0.5, 0.65, 0.9})
    for (double t : {0.01, 0.2, 1.0, 4.0, 10.0}) {
      CHECK_THAT(bare_distance(a, t), WithinAbs(simulated_distance(std::nullopt, a, t), 1e-10));
      CHECK(bare_dDdt(a, t) < 0.0);
      CHECK_THAT(bare_dDdt(a, t), WithinAbs(central_difference(Mode::bare, a, 1.0, t), 1e-6));
    }
}

TEST_CASE("controlled derivative signs", "[backflow]") {
  // Path, p = 1: a = 0.65 sits below sqrt(1/2), so late-time backflow.
  CHECK(analytic_dDdt_path(0.65, 1.0, 5.0) > 0.0);
  CHECK(analytic_dDdt_path(0.65, 1.0, 0.1) < 0.0);
  CHECK(analytic_dDdt_path(0.9, 1.0, 5.0) < 0.0);
  // Switch, p = 1: threshold sqrt(2/5) ~ 0.632.
  CHECK(analytic_dDdt_switch(0.65, 1.0, 5.0) < 0.0);
  CHECK(analytic_dDdt_switch(0.5, 1.0, 5.0) > 0.0);
  CHECK(analytic_dDdt_switch(0.9, 1.0, 5.0) < 0.0);
  // Nearly orthogonal probes relax first.
  CHECK(analytic_dDdt_path(0.99, 1.0, 0.01) < 0.0);
  CHECK(analytic_dDdt_switch(0.99, 1.0, 0.01) < 0.0);
  for (double a : {0.1, 0.4, 0.7, 0.95})
    for (double p : {0.0, 0.5, 1.0}) {
      CHECK(analytic_dDdt_path(a, p, 1e-3) < 0.0);
      CHECK(analytic_dDdt_switch(a, p, 1e-3) < 0.0);
    }
}

TEST_CASE("maximally coherent reductions", "[backflow]") {
  for (double a : {0.2, 0.65, 0.8})
    for (double t : {0.05, 0.5, 2.0, 6.0}) {
      CHECK_THAT(path_bracket(a, 1.0, t), WithinRel(path_bracket_coherent(a, t), 1e-12));
      CHECK_THAT(analytic_dDdt_path(a, 1.0, t), WithinAbs(analytic_dDdt_path_coherent(a, t), 1e-13));
      const double u = std::exp(-2.0 * t);
      CHECK_THAT(switch_derivative_terms(a, 1.0, t).bracket,
                 WithinAbs(2 * u * (1 + 6 * u + u * u) * switch_bracket_coherent(a, t), 1e-12));
    }
}

TEST_CASE("derivative factorization", "[backflow][property]") {
  for (double a : {0.15, 0.5, 0.65, 0.85})
    for (double p : {0.0, 0.3, 0.7, 1.0})
      for (double t : {0.01, 0.3, 1.0, 3.0, 8.0}) {
        const auto path = path_derivative_terms(a, p, t);
        const auto sw = switch_derivative_terms(a, p, t);
        CHECK(path.prefactor > 0.0);
        CHECK(sw.prefactor > 0.0);
        // The scaled path bracket carries the sign of the unscaled one.
        const double raw = path_bracket(a, p, t);
        if (std::abs(raw) > 1e-9) CHECK((path.bracket > 0.0) == (raw > 0.0));
      }
}

TEST_CASE("analytic derivatives match finite differences", "[backflow][property]") {
  for (Mode mode : {Mode::path, Mode::switch_})
    for (double a : {0.1, 0.35, 0.65, 0.9})
      for (double p : {0.0, 0.25, 0.5, 1.0})
        for (double t : {0.02, 0.1, 0.5, 1.5, 4.0, 10.0}) {
          INFO(to_string(mode) << " a=" << a << " p=" << p << " t=" << t);
          CHECK_THAT(analytic_dDdt(mode, a, p, t), WithinAbs(central_difference(mode, a, p, t), 1e-6));
        }
  // The closed-form distance agrees with the explicit supermap.
  for (Mode mode : {Mode::path, Mode::switch_})
    for (double t : {0.3, 2.0})
      CHECK_THAT(analytic_distance(mode, 0.6, 0.4, t),
                 WithinAbs(simulated_distance(config_for(mode, 0.4), 0.6, t), 1e-10));
}

TEST_CASE("asymptotic thresholds", "[backflow]") {
  CHECK_THAT(asymptotic_threshold(Mode::path, 1.0), WithinAbs(std::sqrt(0.5), 1e-15));
  CHECK_THAT(asymptotic_threshold(Mode::switch_, 1.0), WithinAbs(std::sqrt(0.4), 1e-15));
  CHECK(asymptotic_threshold(Mode::path, 0.0) == 0.0);
  CHECK(asymptotic_threshold(Mode::switch_, 0.0) == 0.0);
  CHECK_THROWS_AS(asymptotic_threshold(Mode::bare, 1.0), DomainError);
  CHECK_THROWS_AS(asymptotic_threshold(Mode::path, 1.01), DomainError);
  double prev_path = -1, prev_switch = -1;
  for (int i = 0; i <= 100; ++i) {
    const double p = i / 100.0;
    const double tp = asymptotic_threshold(Mode::path, p), ts = asymptotic_threshold(Mode::switch_, p);
    CHECK(tp > prev_path);
    CHECK(ts > prev_switch);
    CHECK(ts <= tp);
    prev_path = tp;
    prev_switch = ts;
  }
}

TEST_CASE("time grids", "[backflow]") {
  const auto g = TimeGrid::logarithmic();
  CHECK(g.size() == kDefaultTimePoints);
  CHECK(g.times().front() == kDefaultTMin);
  CHECK(g.times().back() == kDefaultTMax);
  CHECK_THROWS_AS(TimeGrid::logarithmic(0.0, 1.0, 10), DomainError);
  CHECK_THROWS_AS(TimeGrid::logarithmic(1.0, 0.5, 10), DomainError);
  CHECK_THROWS_AS(TimeGrid::linear(0.0, 1.0, 1), DomainError);
  CHECK_THROWS_AS(TimeGrid({0.5, 0.5}), DomainError);
  CHECK_THROWS_AS(TimeGrid({}), DomainError);
}

TEST_CASE("detect_backflow examples", "[backflow]") {
  const auto grid = TimeGrid::logarithmic();
  const auto bare = detect_backflow(std::nullopt, 0.65, grid);
  CHECK_FALSE(bare.verdict);
  CHECK(bare.backflow_intervals.empty());
  CHECK(bare.config == "bare");

  const auto path = detect_backflow(Mode::path, 0.65, 1.0, grid);
  CHECK(path.verdict);
  CHECK(path.persistent);
  CHECK_FALSE(path.marginal);
  REQUIRE(path.backflow_intervals.size() == 1);
  // dD/dt decays like e^{-2t}, so it drops below eps before t_max while staying positive.
  CHECK_THAT(path.backflow_intervals[0].t_end, WithinAbs(9.249, 1e-3));
  CHECK(path.derivative.back() > 0.0);
  CHECK(path.max_cross_check_error <= 1e-6);
  CHECK(path.distance.size() == grid.size());

  const auto sw = detect_backflow(Mode::switch_, 0.65, 1.0, grid);
  CHECK_FALSE(sw.verdict);
  CHECK_FALSE(sw.persistent);
  CHECK(sw.max_derivative < 0.0);

  DetectOptions lean;
  lean.compute_distance = false;
  lean.cross_check = false;
  const auto quick = detect_backflow(Mode::path, 0.65, 1.0, grid, lean);
  CHECK(quick.distance.empty());
  CHECK(quick.numeric_derivative.empty());
  CHECK(quick.verdict == path.verdict);
}

TEST_CASE("detect_backflow without a closed form", "[backflow]") {
  // Minus outcome and tilted amplitudes go through the supermap.
  const auto grid = TimeGrid::logarithmic(0.05, 6.0, 40);
  const auto minus = detect_backflow(ControlConfig::path(1.0, AmplitudeVectors::standard(), Outcome::minus),
                                     0.65, grid);
  CHECK(minus.derivative.size() == grid.size());
  CHECK(minus.numeric_derivative.size() == grid.size());
  CHECK(minus.distance.size() == grid.size());

  // With standard amplitudes the numeric route reproduces the closed form.
  ControlConfig forced = ControlConfig::path(0.5);
  forced.amplitudes = AmplitudeVectors{{std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2, 1e-300},
                                       {std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2, 0.0}};
  if (!forced.has_closed_form()) {
    const auto numeric = detect_backflow(forced, 0.4, grid);
    const auto closed = detect_backflow(Mode::path, 0.4, 0.5, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
      CHECK_THAT(numeric.derivative[i], WithinAbs(closed.derivative[i], 1e-6));
  }
}

TEST_CASE("region scan", "[backflow]") {
  ScanOptions opts;
  opts.threads = 2;
  const auto scan = scan_region({0.3, 0.65, 0.9}, {0.0, 0.5, 1.0}, opts);
  REQUIRE(scan.backflow_path.size() == 9);
  CHECK(scan.path(1, 2));
  CHECK_FALSE(scan.switched(1, 2));
  CHECK_FALSE(scan.path(2, 2));
  CHECK(scan.switched(0, 2));
  for (std::size_t ia = 0; ia < 3; ++ia) {
    CHECK_FALSE(scan.path(ia, 0));
    CHECK_FALSE(scan.switched(ia, 0));
  }
  for (std::size_t k = 0; k < 9; ++k)
    if (scan.backflow_switch[k]) CHECK(scan.backflow_path[k]);
  CHECK_THROWS_AS(scan_region({0.0}, {0.5}), DomainError);
  CHECK_THROWS_AS(scan_region({0.5}, {1.5}), DomainError);

  opts.threads = 1;
  const auto serial = scan_region({0.3, 0.65, 0.9}, {0.0, 0.5, 1.0}, opts);
  CHECK(serial.backflow_path == scan.backflow_path);
  CHECK(serial.backflow_switch == scan.backflow_switch);
}

TEST_CASE("empirical boundary against the asymptotic threshold", "[backflow]") {
  BoundaryOptions opts;
  opts.a_step = 2e-3;
  for (double p : {0.2, 0.5, 1.0}) {
    const double path_threshold = asymptotic_threshold(Mode::path, p);
    const auto path = backflow_boundary(Mode::path, p, opts);
    REQUIRE(path.late_time);
    REQUIRE(path.full_window);
    CHECK(std::abs(*path.late_time - path_threshold) <= opts.a_step);
    CHECK(std::abs(*path.full_window - path_threshold) <= opts.a_step);

    const double switch_threshold = asymptotic_threshold(Mode::switch_, p);
    const auto sw = backflow_boundary(Mode::switch_, p, opts);
    REQUIRE(sw.late_time);
    CHECK(std::abs(*sw.late_time - switch_threshold) <= opts.a_step);
  }

  // For weak coherence the switch shows transient backflow above the
  // asymptotic threshold. Confirm it with the explicit supermap.
  const double p = 0.2;
  const auto sw = backflow_boundary(Mode::switch_, p, opts);
  REQUIRE(sw.full_window);
  const double threshold = asymptotic_threshold(Mode::switch_, p);
  CHECK(*sw.full_window > threshold + 10 * opts.a_step);
  const double a = 0.5 * (threshold + *sw.full_window);
  const auto report = detect_backflow(Mode::switch_, a, p, TimeGrid::logarithmic());
  REQUIRE(report.verdict);
  CHECK_FALSE(report.persistent);
  const double t = 0.5 * (report.backflow_intervals[0].t_start + report.backflow_intervals[0].t_end);
  const double h = 1e-4;
  const auto cfg = ControlConfig::switched(p);
  const double fd = (simulated_distance(cfg, a, t + h) - simulated_distance(cfg, a, t - h)) / (2 * h);
  CHECK(fd > 0.0);
}
