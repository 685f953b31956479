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

// Self-check suites run by `cohflow validate`: CPTP validity of every
// constructed channel, Kraus-vs-ODE agreement, closed-form vs supermap
// agreement, analytic vs finite-difference derivatives and the
// maximally-coherent reduction identities.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "cohflow/backflow.hpp"
#include "cohflow/channel.hpp"
#include "cohflow/control.hpp"
#include "cohflow/random.hpp"

namespace cohflow::validation {

struct Check {
  std::string suite;
  std::string name;
  double value;
  double limit;
  bool passed;
};

struct Options {
  /// Times for the ODE suite; empty means {0.5, 1, 2, 5}.
  std::vector<double> ode_times;
  double ode_dt = 1e-3;
  std::size_t random_states = 20;
  unsigned seed = 2026;
  /// Test hook: scale K3 of phi_t by (1 + perturbation) in the CPTP suite.
  double kraus_perturbation = 0.0;
};

inline std::vector<double> steps(double from, double to, double step) {
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::llround((to - from) / step));
  for (std::size_t i = 0; i <= n; ++i) out.push_back(from + step * double(i));
  return out;
}

inline KrausChannel perturbed_phi_t(double t, double perturbation) {
  const auto phi = phi_t_kraus(t);
  std::vector<ComplexMatrix> ops(phi.ops().begin(), phi.ops().end());
  ops.back() *= 1.0 + perturbation;
  return KrausChannel(std::move(ops), "perturbed " + phi.label());
}

inline std::vector<Check> cptp_suite(const Options& options = {}) {
  struct Worst {
    double residual = 0.0;
    double min_eig = 1.0;
    void add(const CptpReport& r) {
      residual = std::max(residual, r.completeness_residual);
      min_eig = std::min(min_eig, r.choi_min_eigenvalue);
    }
  } phi, sw, path;
  for (double t : steps(0.0, 5.0, 0.1)) {
    const auto k = options.kraus_perturbation != 0.0 ? perturbed_phi_t(t, options.kraus_perturbation)
                                                     : phi_t_kraus(t);
    phi.add(validate_cptp(k));
    sw.add(validate_cptp(switch_kraus(k, k)));
    path.add(validate_cptp(path_kraus(k, k, AmplitudeVectors::standard())));
  }
  std::vector<Check> out;
  auto push = [&](const char* name, const Worst& w) {
    out.push_back({"cptp", std::string(name) + " completeness residual", w.residual,
                   tolerance::hermitian, w.residual <= tolerance::hermitian});
    out.push_back({"cptp", std::string(name) + " Choi min eigenvalue", w.min_eig,
                   -tolerance::psd, w.min_eig >= -tolerance::psd});
  };
  push("phi_t", phi);
  push("switch", sw);
  push("path", path);
  return out;
}

inline std::vector<Check> ode_suite(const Options& options = {}) {
  const std::vector<double> times =
      options.ode_times.empty() ? std::vector<double>{0.5, 1.0, 2.0, 5.0} : options.ode_times;
  std::mt19937_64 rng(options.seed);
  const auto gen = CanonicalGenerator::eternal_non_markovian();
  std::vector<Check> out;
  for (double t : times) {
    const auto phi = phi_t_kraus(t);
    double worst = 0.0;
    for (std::size_t k = 0; k < options.random_states; ++k) {
      const auto rho0 = random_density(rng);
      worst = std::max(worst, trace_distance(apply(phi, rho0),
                                             integrate_canonical(gen, rho0, t, options.ode_dt)));
    }
    out.push_back({"ode", "Kraus vs RK4 trace distance at t=" + std::to_string(t), worst, 1e-6,
                   worst <= 1e-6});
  }
  return out;
}

inline std::vector<Check> closed_form_suite(const Options& options = {}) {
  std::mt19937_64 rng(options.seed + 1);
  std::vector<DensityOperator> inputs;
  for (int k = 0; k < 10; ++k) inputs.push_back(random_density(rng));
  double worst_path = 0.0, worst_switch = 0.0;
  for (double t : steps(0.1, 5.0, 0.1))
    for (double p : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const auto phi = phi_t_kraus(t);
      const auto path_cfg = ControlConfig::path(p);
      const auto switch_cfg = ControlConfig::switched(p);
      const auto path_joint = supermap_kraus(path_cfg, phi, phi);
      const auto switch_joint = supermap_kraus(switch_cfg, phi, phi);
      for (const auto& rho : inputs) {
        worst_path = std::max(worst_path,
                              max_abs_diff(postselect(path_cfg, path_joint, rho).state.matrix(),
                                           analytic_state_path(rho, t, p).matrix()));
        worst_switch = std::max(
            worst_switch, max_abs_diff(postselect(switch_cfg, switch_joint, rho).state.matrix(),
                                       analytic_state_switch(rho, t, p).matrix()));
      }
    }
  return {{"closed-form", "path closed form vs supermap", worst_path, 1e-10, worst_path <= 1e-10},
          {"closed-form", "switch closed form vs supermap", worst_switch, 1e-10,
           worst_switch <= 1e-10}};
}

inline std::vector<Check> derivative_suite(const Options& = {}) {
  const double h = kFiniteDifferenceStep;
  const auto times = TimeGrid::logarithmic(0.05, 8.0, 25).times();
  double worst[3] = {0.0, 0.0, 0.0};
  for (double a : {0.1, 0.3, 0.5, 0.65, 0.8, 0.95})
    for (double p : {0.0, 0.25, 0.5, 0.75, 1.0})
      for (double t : times)
        for (Mode mode : {Mode::bare, Mode::path, Mode::switch_}) {
          const double fd = (analytic_distance(mode, a, p, t + h) -
                             analytic_distance(mode, a, p, t - h)) / (2.0 * h);
          auto& w = worst[static_cast<int>(mode)];
          w = std::max(w, std::abs(fd - analytic_dDdt(mode, a, p, t)));
        }
  std::vector<Check> out;
  for (Mode mode : {Mode::bare, Mode::path, Mode::switch_}) {
    const double w = worst[static_cast<int>(mode)];
    out.push_back({"derivative", std::string(to_string(mode)) + " analytic vs central difference",
                   w, 1e-6, w <= 1e-6});
  }
  return out;
}

inline std::vector<Check> reduction_suite(const Options& = {}) {
  double bracket = 0.0, value = 0.0, coeff = 0.0;
  double switch_identity = 0.0;
  for (double a : steps(0.05, 0.95, 0.05))
    for (double t : steps(0.1, 5.0, 0.1)) {
      bracket = std::max(bracket, std::abs(path_bracket(a, 1.0, t) - path_bracket_coherent(a, t)));
      value = std::max(value, std::abs(analytic_dDdt_path(a, 1.0, t) -
                                       analytic_dDdt_path_coherent(a, t)));
      // The u-polynomial at p = 1 factors as 2u(1 + 6u + u^2) times the coherent bracket.
      const double u = std::exp(-2.0 * t);
      const double s1 = switch_derivative_terms(a, 1.0, t).bracket;
      const double s2 = 2.0 * u * (1.0 + 6.0 * u + u * u) * switch_bracket_coherent(a, t);
      switch_identity = std::max(switch_identity, std::abs(s1 - s2) / std::max(1.0, std::abs(s2)));
    }
  for (double t : steps(0.0, 5.0, 0.1)) {
    const double e = std::exp(2.0 * t), e2 = e * e;
    const auto pc = path_coefficients(t, 1.0);
    const auto sc = switch_coefficients(t, 1.0);
    coeff = std::max({coeff, std::abs(pc.a - 2.0 * (e + 1.0) / (5.0 * e - 1.0)),
                      std::abs(pc.b - (e - 1.0) / (5.0 * e - 1.0)),
                      std::abs(sc.a - (3.0 * e2 + 2.0 * e + 3.0) / (7.0 * e2 + 2.0 * e - 1.0)),
                      std::abs(sc.b - 4.0 * (e2 - 1.0) / (7.0 * e2 + 2.0 * e - 1.0)),
                      std::abs(sc.c - sc.a)});
  }
  return {{"reduction", "path bracket at p=1", bracket, 1e-10, bracket <= 1e-10},
          {"reduction", "path dD/dt at p=1", value, 1e-10, value <= 1e-10},
          {"reduction", "switch bracket at p=1", switch_identity, 1e-10, switch_identity <= 1e-10},
          {"reduction", "state coefficients at p=1", coeff, 1e-12, coeff <= 1e-12}};
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"cptp", "ode", "closed-form", "derivative",
                                              "reduction"};
  return names;
}

inline std::vector<Check> run_suite(const std::string& name, const Options& options = {}) {
  if (name == "cptp") return cptp_suite(options);
  if (name == "ode") return ode_suite(options);
  if (name == "closed-form") return closed_form_suite(options);
  if (name == "derivative") return derivative_suite(options);
  if (name == "reduction") return reduction_suite(options);
  if (name == "all") {
    std::vector<Check> all;
    for (const auto& n : suite_names()) {
      auto part = run_suite(n, options);
      all.insert(all.end(), part.begin(), part.end());
    }
    return all;
  }
  throw DomainError("unknown validation suite '" + name + "'");
}

}  // namespace cohflow::validation
