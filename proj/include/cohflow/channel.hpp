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

// Kraus channels, the phi_t family of the eternally non-Markovian qubit
// dynamics, and the canonical time-local master equation with an RK4
// integrator that serves as an independent check on the Kraus form.

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cohflow/matrix.hpp"

namespace cohflow {

struct CptpReport {
  double completeness_residual = 0.0;  ///< max |(sum K^dagger K - I)_ij|
  double choi_min_eigenvalue = 0.0;

  bool trace_preserving() const noexcept {
    return completeness_residual <= tolerance::hermitian;
  }
  bool completely_positive() const noexcept {
    return choi_min_eigenvalue >= -tolerance::psd;
  }
  bool passed() const noexcept { return trace_preserving() && completely_positive(); }
};

/// Choi matrix sum_k |K_k>><<K_k| with |K>> the column-stacked vectorization,
/// i.e. J = sum_ij |i><j| (x) E(|i><j|).
inline ComplexMatrix choi_matrix(std::span<const ComplexMatrix> ops) {
  if (ops.empty()) throw DimensionError("choi_matrix: empty Kraus set");
  const std::size_t n = ops.front().dim();
  ComplexMatrix choi(n * n);
  for (const auto& k : ops) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t r = 0; r < n; ++r) {
        const complex u = k(r, i);
        if (u == complex{}) continue;
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t c = 0; c < n; ++c)
            choi(i * n + r, j * n + c) += u * std::conj(k(c, j));
      }
  }
  return choi;
}

inline CptpReport validate_kraus(std::span<const ComplexMatrix> ops) {
  const std::size_t n = ops.front().dim();
  ComplexMatrix sum(n);
  for (const auto& k : ops) sum += k.adjoint() * k;
  CptpReport report;
  report.completeness_residual = max_abs_diff(sum, ComplexMatrix::identity(n));
  report.choi_min_eigenvalue = eig_hermitian(choi_matrix(ops)).back();
  return report;
}

/// A finite Kraus set. The CPTP report is computed once at construction;
/// applying a channel whose report failed throws.
class KrausChannel {
 public:
  KrausChannel(std::vector<ComplexMatrix> ops, std::string label = {})
      : ops_(std::move(ops)), label_(std::move(label)) {
    if (ops_.empty()) throw DimensionError("KrausChannel: empty Kraus set");
    for (const auto& k : ops_)
      if (k.dim() != ops_.front().dim())
        throw DimensionError("KrausChannel: Kraus operators of unequal dimension");
    report_ = validate_kraus(ops_);
  }

  static KrausChannel identity(std::size_t dim) {
    return KrausChannel({ComplexMatrix::identity(dim)}, "identity");
  }

  /// rho -> U rho U^dagger
  static KrausChannel unitary(ComplexMatrix u, std::string label = {}) {
    return KrausChannel({std::move(u)}, std::move(label));
  }

  std::span<const ComplexMatrix> ops() const noexcept { return ops_; }
  std::size_t size() const noexcept { return ops_.size(); }
  std::size_t dim() const noexcept { return ops_.front().dim(); }
  const std::string& label() const noexcept { return label_; }
  const CptpReport& report() const noexcept { return report_; }

 private:
  std::vector<ComplexMatrix> ops_;
  std::string label_;
  CptpReport report_;
};

inline CptpReport validate_cptp(const KrausChannel& channel) {
  return validate_kraus(channel.ops());
}

/// sum_i K_i m K_i^dagger on an arbitrary operator (no state validation).
inline ComplexMatrix apply_to_operator(const KrausChannel& channel, const ComplexMatrix& m) {
  if (m.dim() != channel.dim())
    throw DimensionError("apply: channel acts on dim " + std::to_string(channel.dim()) +
                         ", operand has dim " + std::to_string(m.dim()));
  ComplexMatrix out(m.dim());
  for (const auto& k : channel.ops()) out += k * m * k.adjoint();
  return out;
}

inline DensityOperator apply(const KrausChannel& channel, const DensityOperator& rho) {
  if (!channel.report().passed())
    throw InvalidChannelError("apply: channel '" + channel.label() +
                              "' failed CPTP validation (completeness residual " +
                              std::to_string(channel.report().completeness_residual) + ")");
  return DensityOperator(hermitian_part(apply_to_operator(channel, rho.matrix())));
}

/// outer o inner: Kraus set {E_i F_j}; inner acts first.
inline KrausChannel compose(const KrausChannel& outer, const KrausChannel& inner) {
  if (outer.dim() != inner.dim())
    throw DimensionError("compose: dimension mismatch");
  std::vector<ComplexMatrix> ops;
  ops.reserve(outer.size() * inner.size());
  for (const auto& e : outer.ops())
    for (const auto& f : inner.ops()) ops.push_back(e * f);
  return KrausChannel(std::move(ops), outer.label() + " o " + inner.label());
}

struct PhiTCoefficients {
  double t;
  double alpha1;
  double alpha2;
  double alpha3;

  static PhiTCoefficients at(double t) {
    if (!(t >= 0.0) || !std::isfinite(t))
      throw DomainError("phi_t: time must be finite and non-negative, got " + std::to_string(t));
    const double decay = std::exp(-2.0 * t);
    return {t, 0.5 * (1.0 + decay), 0.5 * (1.0 - decay), 0.5 * (1.0 + decay)};
  }
};

/// Kraus form of the dynamical map at time t. K4 ~ (alpha1 - alpha3) is
/// identically zero and is omitted, leaving
///   K1 = sqrt(alpha2) |0><1|,  K2 = sqrt(alpha2) |1><0|,
///   K3 = sqrt((alpha1 + alpha3) / 2) I.
inline KrausChannel phi_t_kraus(double t) {
  const auto c = PhiTCoefficients::at(t);
  const double flip = std::sqrt(c.alpha2);
  const double keep = std::sqrt(0.5 * (c.alpha1 + c.alpha3));
  return KrausChannel({ComplexMatrix{{0.0, flip}, {0.0, 0.0}},
                       ComplexMatrix{{0.0, 0.0}, {flip, 0.0}},
                       keep * ComplexMatrix::identity(2)},
                      "phi_t(" + std::to_string(t) + ")");
}

/// d rho/dt = -i[H, rho] + sum_i gamma_i(t)/2 (sigma_i rho sigma_i - rho)
struct CanonicalGenerator {
  std::array<std::function<double(double)>, 3> rates;
  ComplexMatrix hamiltonian = ComplexMatrix(2);

  /// gamma_1 = gamma_2 = 1, gamma_3 = -tanh t, no Hamiltonian.
  static CanonicalGenerator eternal_non_markovian() {
    return {{[](double) { return 1.0; }, [](double) { return 1.0; },
             [](double t) { return -std::tanh(t); }},
            ComplexMatrix(2)};
  }
};

inline ComplexMatrix canonical_rhs(const CanonicalGenerator& gen, double t,
                                   const ComplexMatrix& rho) {
  if (rho.dim() != 2) throw DimensionError("canonical_rhs: qubit operator expected");
  static const std::array<ComplexMatrix, 3> sigma{pauli::x(), pauli::y(), pauli::z()};
  const complex minus_i(0.0, -1.0);
  ComplexMatrix out = minus_i * (gen.hamiltonian * rho - rho * gen.hamiltonian);
  for (std::size_t i = 0; i < 3; ++i) {
    const double g = gen.rates[i](t);
    if (g == 0.0) continue;
    out += (0.5 * g) * (sigma[i] * rho * sigma[i] - rho);
  }
  return out;
}

inline ComplexMatrix canonical_rhs(const CanonicalGenerator& gen, double t,
                                   const DensityOperator& rho) {
  return canonical_rhs(gen, t, rho.matrix());
}

/// Classical RK4 on the canonical equation. The step is shrunk so that an
/// integer number of steps lands exactly on t_final; after every step the
/// state is re-Hermitized and renormalized to unit trace.
inline DensityOperator integrate_canonical(const CanonicalGenerator& gen,
                                           const DensityOperator& rho0, double t_final,
                                           double dt = 1e-3) {
  if (!(dt > 0.0 && dt <= 1e-2))
    throw DomainError("integrate_canonical: dt must lie in (0, 1e-2], got " + std::to_string(dt));
  if (!(t_final >= 0.0) || !std::isfinite(t_final))
    throw DomainError("integrate_canonical: t_final must be finite and non-negative");
  if (t_final == 0.0) return rho0;

  const auto steps = static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9));
  const double h = t_final / static_cast<double>(steps);
  ComplexMatrix rho = rho0.matrix();
  for (std::size_t n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * h;
    const auto k1 = canonical_rhs(gen, t, rho);
    const auto k2 = canonical_rhs(gen, t + 0.5 * h, rho + (0.5 * h) * k1);
    const auto k3 = canonical_rhs(gen, t + 0.5 * h, rho + (0.5 * h) * k2);
    const auto k4 = canonical_rhs(gen, t + h, rho + h * k3);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    rho = hermitian_part(rho);
    rho *= 1.0 / rho.trace().real();
  }
  return DensityOperator(std::move(rho));
}

/// (x, y, z) with rho = (I + x sigma_x + y sigma_y + z sigma_z) / 2.
inline std::array<double, 3> bloch_vector(const DensityOperator& rho) {
  if (rho.dim() != 2) throw DimensionError("bloch_vector: qubit state expected");
  return {2.0 * rho(0, 1).real(), -2.0 * rho(0, 1).imag(),
          (rho(0, 0) - rho(1, 1)).real()};
}

}  // namespace cohflow
