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

// Coherent control of two channel copies: the quantum switch (superposed
// causal order) and coherent path control (superposed choice of channel),
// driven by a control qubit omega = p |+><+| + (1 - p) I/2 and post-selected
// on a measurement of the control in the {|+>, |->} basis.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cohflow/channel.hpp"
#include "cohflow/matrix.hpp"

namespace cohflow {

enum class Mode { bare, path, switch_ };
enum class Outcome { plus, minus };

inline std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::bare: return "bare";
    case Mode::path: return "path";
    case Mode::switch_: return "switch";
  }
  return "?";
}

inline std::string_view to_string(Outcome outcome) {
  return outcome == Outcome::plus ? "plus" : "minus";
}

inline const Qubit& outcome_vector(Outcome outcome) {
  return outcome == Outcome::plus ? basis::plus : basis::minus;
}

/// Path-control amplitudes. alpha is indexed by the Kraus index of the second
/// channel, beta by that of the first; both must be unit vectors.
struct AmplitudeVectors {
  std::vector<complex> alpha;
  std::vector<complex> beta;

  /// alpha_1 = alpha_2 = beta_1 = beta_2 = 1/sqrt(2), alpha_3 = beta_3 = 0.
  static AmplitudeVectors standard() {
    const double h = std::numbers::sqrt2 / 2;
    return {{h, h, 0.0}, {h, h, 0.0}};
  }

  void validate() const {
    auto norm = [](const std::vector<complex>& v) {
      double s = 0.0;
      for (const auto& z : v) s += std::norm(z);
      return s;
    };
    if (std::abs(norm(alpha) - 1.0) > 1e-12 || std::abs(norm(beta) - 1.0) > 1e-12)
      throw DomainError("amplitude vectors must be normalized");
  }

  friend bool operator==(const AmplitudeVectors&, const AmplitudeVectors&) = default;
};

/// omega = p |+><+| + (1 - p) I/2
class ControlState {
 public:
  explicit ControlState(double p = 1.0) : p_(p) {
    if (!(p >= 0.0 && p <= 1.0))
      throw DomainError("control coherence p must lie in [0, 1], got " + std::to_string(p));
  }

  double p() const noexcept { return p_; }

  DensityOperator omega() const {
    return DensityOperator(p_ * projector(basis::plus) +
                           (0.5 * (1.0 - p_)) * ComplexMatrix::identity(2));
  }

 private:
  double p_;
};

struct ControlConfig {
  Mode mode = Mode::path;
  std::optional<AmplitudeVectors> amplitudes;  ///< path mode only
  ControlState control;
  Outcome outcome = Outcome::plus;

  static ControlConfig path(double p, AmplitudeVectors amps = AmplitudeVectors::standard(),
                            Outcome outcome = Outcome::plus) {
    return {Mode::path, std::move(amps), ControlState(p), outcome};
  }
  static ControlConfig switched(double p, Outcome outcome = Outcome::plus) {
    return {Mode::switch_, std::nullopt, ControlState(p), outcome};
  }

  void validate() const {
    if (mode == Mode::bare) throw DomainError("ControlConfig: mode must be path or switch");
    if ((mode == Mode::path) != amplitudes.has_value())
      throw DomainError("ControlConfig: amplitudes are required for path mode and only there");
    if (amplitudes) amplitudes->validate();
  }

  /// True when the closed-form output states apply (standard amplitudes, "+").
  bool has_closed_form() const {
    return outcome == Outcome::plus &&
           (mode == Mode::switch_ || (amplitudes && *amplitudes == AmplitudeVectors::standard()));
  }
};

/// S_ij = E_i F_j (x) |0><0| + F_j E_i (x) |1><1|
inline KrausChannel switch_kraus(const KrausChannel& e, const KrausChannel& f) {
  if (e.dim() != f.dim()) throw DimensionError("switch_kraus: channel dimensions differ");
  const auto p0 = projector(basis::zero), p1 = projector(basis::one);
  std::vector<ComplexMatrix> ops;
  ops.reserve(e.size() * f.size());
  for (const auto& ei : e.ops())
    for (const auto& fj : f.ops()) ops.push_back(kron(ei * fj, p0) + kron(fj * ei, p1));
  return KrausChannel(std::move(ops), "switch(" + e.label() + ", " + f.label() + ")");
}

/// N_ij = alpha_j E_i (x) |0><0| + beta_i F_j (x) |1><1|
inline KrausChannel path_kraus(const KrausChannel& e, const KrausChannel& f,
                               const AmplitudeVectors& amps) {
  if (e.dim() != f.dim()) throw DimensionError("path_kraus: channel dimensions differ");
  if (amps.beta.size() != e.size() || amps.alpha.size() != f.size())
    throw DimensionError("path_kraus: amplitude lengths must match Kraus counts (" +
                         std::to_string(amps.beta.size()) + "/" + std::to_string(e.size()) +
                         ", " + std::to_string(amps.alpha.size()) + "/" +
                         std::to_string(f.size()) + ")");
  amps.validate();
  const auto p0 = projector(basis::zero), p1 = projector(basis::one);
  std::vector<ComplexMatrix> ops;
  ops.reserve(e.size() * f.size());
  for (std::size_t i = 0; i < e.size(); ++i)
    for (std::size_t j = 0; j < f.size(); ++j)
      ops.push_back(amps.alpha[j] * kron(e.ops()[i], p0) + amps.beta[i] * kron(f.ops()[j], p1));
  return KrausChannel(std::move(ops), "path(" + e.label() + ", " + f.label() + ")");
}

struct PostSelectedState {
  DensityOperator state;
  double probability;
};

/// Joint Kraus set of the configured supermap over e and f.
inline KrausChannel supermap_kraus(const ControlConfig& config, const KrausChannel& e,
                                   const KrausChannel& f) {
  config.validate();
  return config.mode == Mode::switch_ ? switch_kraus(e, f)
                                      : path_kraus(e, f, *config.amplitudes);
}

/// Applies an already built joint channel to rho0 (x) omega, projects the
/// control on the configured outcome and renormalizes.
inline PostSelectedState postselect(const ControlConfig& config, const KrausChannel& joint,
                                    const DensityOperator& rho0) {
  const auto out = apply(joint, kron(rho0, config.control.omega()));
  auto proj = project_control(out, outcome_vector(config.outcome));
  ComplexMatrix normalized = hermitian_part((1.0 / proj.probability) * proj.block);
  return {DensityOperator(std::move(normalized)), proj.probability};
}

inline PostSelectedState controlled_output(const ControlConfig& config, const KrausChannel& e,
                                           const KrausChannel& f, const DensityOperator& rho0) {
  return postselect(config, supermap_kraus(config, e, f), rho0);
}

/// Two copies of phi_t under the configured control.
inline PostSelectedState controlled_output(const ControlConfig& config,
                                           const DensityOperator& rho0, double t) {
  const auto phi = phi_t_kraus(t);
  return controlled_output(config, phi, phi, rho0);
}

namespace detail {
inline void check_time_and_p(double t, double p) {
  if (!(t >= 0.0) || !std::isfinite(t))
    throw DomainError("time must be finite and non-negative, got " + std::to_string(t));
  if (!(p >= 0.0 && p <= 1.0))
    throw DomainError("control coherence p must lie in [0, 1], got " + std::to_string(p));
}
}  // namespace detail

// Closed forms below are written in u = exp(-2t); multiplying numerator and
// denominator by the matching power of exp(2t) gives the familiar expressions
//   A_I = 2(e^{2t} + 1) / ((4+p) e^{2t} - p),  B_I = (e^{2t} - 1) / ((4+p) e^{2t} - p).

struct PathCoefficients {
  double a;
  double b;
};

inline PathCoefficients path_coefficients(double t, double p) {
  detail::check_time_and_p(t, p);
  const double u = std::exp(-2.0 * t);
  const double den = (4.0 + p) - p * u;
  return {2.0 * (1.0 + u) / den, (1.0 - u) / den};
}

/// A_S = ((2+p) e^{4t} + 2p e^{2t} + p + 2) / d,  B_S = 2(1+p)(e^{4t} - 1) / d,
/// C_S = ((1+2p) e^{4t} + 2 e^{2t} + 2p + 1) / d,  d = (4+3p) e^{4t} + 2p e^{2t} - p.
struct SwitchCoefficients {
  double a;
  double b;
  double c;
};

inline SwitchCoefficients switch_coefficients(double t, double p) {
  detail::check_time_and_p(t, p);
  const double u = std::exp(-2.0 * t), u2 = u * u;
  const double den = (4.0 + 3.0 * p) + 2.0 * p * u - p * u2;
  return {((2.0 + p) + 2.0 * p * u + (p + 2.0) * u2) / den,
          2.0 * (1.0 + p) * (1.0 - u2) / den,
          ((1.0 + 2.0 * p) + 2.0 * u + (2.0 * p + 1.0) * u2) / den};
}

/// Probability of the "+" outcome for path control: ((4+p) e^{2t} - p) / (8 e^{2t}).
inline double path_plus_probability(double t, double p) {
  detail::check_time_and_p(t, p);
  return ((4.0 + p) - p * std::exp(-2.0 * t)) / 8.0;
}

/// Probability of the "+" outcome for the switch:
/// ((4+3p) e^{4t} + 2p e^{2t} - p) / (8 e^{4t}).
inline double switch_plus_probability(double t, double p) {
  detail::check_time_and_p(t, p);
  const double u = std::exp(-2.0 * t);
  return ((4.0 + 3.0 * p) + 2.0 * p * u - p * u * u) / 8.0;
}

inline DensityOperator analytic_state_path(const DensityOperator& rho0, double t, double p) {
  if (rho0.dim() != 2) throw DimensionError("analytic_state_path: qubit state expected");
  const auto [a, b] = path_coefficients(t, p);
  const auto& r = rho0;
  ComplexMatrix out{{r(0, 0) * a + (2.0 + p) * r(1, 1) * b, r(0, 1) * a + p * r(1, 0) * b},
                    {p * r(0, 1) * b + r(1, 0) * a, (2.0 + p) * r(0, 0) * b + r(1, 1) * a}};
  return DensityOperator(hermitian_part(out));
}

inline DensityOperator analytic_state_switch(const DensityOperator& rho0, double t, double p) {
  if (rho0.dim() != 2) throw DimensionError("analytic_state_switch: qubit state expected");
  const auto [a, b, c] = switch_coefficients(t, p);
  const auto& r = rho0;
  ComplexMatrix out{{r(0, 0) * a + r(1, 1) * b, r(0, 1) * c},
                    {r(1, 0) * c, r(0, 0) * b + r(1, 1) * a}};
  return DensityOperator(hermitian_part(out));
}

}  // namespace cohflow
