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

// Dense complex matrices for small (multi-)qubit systems, Hermitian spectra,
// density-operator validation and trace distance.
//
// Tensor-product convention used throughout the library: system (x) control,
// i.e. the row index of kron(S, C) is s * dim(C) + c.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cohflow/errors.hpp"

namespace cohflow {

using complex = std::complex<double>;

namespace tolerance {
inline constexpr double hermitian = 1e-12;
inline constexpr double unit_trace = 1e-12;
inline constexpr double psd = 1e-10;
/// Looser Hermiticity gate for inputs to the eigensolver.
inline constexpr double eig_input = 1e-10;
inline constexpr double postselection = 1e-12;
}  // namespace tolerance

class ComplexMatrix {
 public:
  ComplexMatrix() = default;

  explicit ComplexMatrix(std::size_t dim) : dim_(dim), entries_(dim * dim) {
    if (dim == 0) throw DimensionError("matrix dimension must be positive");
  }

  ComplexMatrix(std::size_t dim, std::vector<complex> entries)
      : dim_(dim), entries_(std::move(entries)) {
    if (dim == 0) throw DimensionError("matrix dimension must be positive");
    if (entries_.size() != dim * dim)
      throw DimensionError("entry count " + std::to_string(entries_.size()) +
                           " does not match dim^2 = " +
                           std::to_string(dim * dim));
  }

  /// Row-major literal, e.g. {{1, 0}, {0, -1}}.
  ComplexMatrix(std::initializer_list<std::initializer_list<complex>> rows)
      : dim_(rows.size()) {
    if (dim_ == 0) throw DimensionError("matrix dimension must be positive");
    entries_.reserve(dim_ * dim_);
    for (const auto& row : rows) {
      if (row.size() != dim_) throw DimensionError("matrix literal is not square");
      entries_.insert(entries_.end(), row.begin(), row.end());
    }
  }

  static ComplexMatrix identity(std::size_t dim) {
    ComplexMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  static ComplexMatrix diagonal(std::span<const double> diag) {
    ComplexMatrix m(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
  }

  std::size_t dim() const noexcept { return dim_; }
  std::span<const complex> entries() const noexcept { return entries_; }

  complex& operator()(std::size_t row, std::size_t col) {
    return entries_[row * dim_ + col];
  }
  const complex& operator()(std::size_t row, std::size_t col) const {
    return entries_[row * dim_ + col];
  }

  ComplexMatrix adjoint() const {
    ComplexMatrix out(dim_);
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t c = 0; c < dim_; ++c) out(c, r) = std::conj((*this)(r, c));
    return out;
  }

  complex trace() const {
    complex sum = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) sum += (*this)(i, i);
    return sum;
  }

  /// Largest entrywise modulus.
  double max_abs() const {
    double m = 0.0;
    for (const auto& z : entries_) m = std::max(m, std::abs(z));
    return m;
  }

  ComplexMatrix& operator+=(const ComplexMatrix& rhs) {
    check_same_dim(rhs, "+=");
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += rhs.entries_[i];
    return *this;
  }
  ComplexMatrix& operator-=(const ComplexMatrix& rhs) {
    check_same_dim(rhs, "-=");
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= rhs.entries_[i];
    return *this;
  }
  ComplexMatrix& operator*=(complex s) {
    for (auto& z : entries_) z *= s;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs += rhs; }
  friend ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs -= rhs; }
  friend ComplexMatrix operator*(ComplexMatrix m, complex s) { return m *= s; }
  friend ComplexMatrix operator*(complex s, ComplexMatrix m) { return m *= s; }

  friend ComplexMatrix operator*(const ComplexMatrix& lhs, const ComplexMatrix& rhs) {
    lhs.check_same_dim(rhs, "*");
    const std::size_t n = lhs.dim_;
    ComplexMatrix out(n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t k = 0; k < n; ++k) {
        const complex l = lhs(r, k);
        if (l == complex{}) continue;
        for (std::size_t c = 0; c < n; ++c) out(r, c) += l * rhs(k, c);
      }
    return out;
  }

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  void check_same_dim(const ComplexMatrix& rhs, const char* op) const {
    if (dim_ != rhs.dim_)
      throw DimensionError(std::string("dimension mismatch in ") + op + ": " +
                           std::to_string(dim_) + " vs " + std::to_string(rhs.dim_));
  }

  std::size_t dim_ = 0;
  std::vector<complex> entries_;
};

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a - b).max_abs();
}

inline double hermiticity_residual(const ComplexMatrix& m) {
  return max_abs_diff(m, m.adjoint());
}

/// (M + M^dagger) / 2
inline ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  return 0.5 * (m + m.adjoint());
}

/// Kronecker product; row index of the result is ia * dim(b) + ib.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const std::size_t na = a.dim(), nb = b.dim();
  ComplexMatrix out(na * nb);
  for (std::size_t ra = 0; ra < na; ++ra)
    for (std::size_t ca = 0; ca < na; ++ca) {
      const complex x = a(ra, ca);
      if (x == complex{}) continue;
      for (std::size_t rb = 0; rb < nb; ++rb)
        for (std::size_t cb = 0; cb < nb; ++cb)
          out(ra * nb + rb, ca * nb + cb) = x * b(rb, cb);
    }
  return out;
}

/// |u><v|
inline ComplexMatrix outer(std::span<const complex> u, std::span<const complex> v) {
  if (u.size() != v.size()) throw DimensionError("outer: vector lengths differ");
  ComplexMatrix out(u.size());
  for (std::size_t r = 0; r < u.size(); ++r)
    for (std::size_t c = 0; c < v.size(); ++c) out(r, c) = u[r] * std::conj(v[c]);
  return out;
}

using Qubit = std::array<complex, 2>;

namespace basis {
inline const Qubit zero{1.0, 0.0};
inline const Qubit one{0.0, 1.0};
inline const Qubit plus{std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2};
inline const Qubit minus{std::numbers::sqrt2 / 2, -std::numbers::sqrt2 / 2};
}  // namespace basis

inline ComplexMatrix projector(const Qubit& v) { return outer(v, v); }

namespace pauli {
inline ComplexMatrix x() { return {{0.0, 1.0}, {1.0, 0.0}}; }
inline ComplexMatrix y() { return {{0.0, complex(0, -1)}, {complex(0, 1), 0.0}}; }
inline ComplexMatrix z() { return {{1.0, 0.0}, {0.0, -1.0}}; }
}  // namespace pauli

namespace detail {

// One cyclic Jacobi sweep over all off-diagonal pairs. Works on a Hermitian
// matrix in place; returns the off-diagonal Frobenius norm before the sweep.
inline double jacobi_sweep(ComplexMatrix& a) {
  const std::size_t n = a.dim();
  double off = 0.0;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) off += std::norm(a(p, q));
  off = std::sqrt(2.0 * off);

  for (std::size_t p = 0; p + 1 < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      const complex apq = a(p, q);
      const double g = std::abs(apq);
      if (g == 0.0) continue;
      const complex phase = apq / g;
      const double app = a(p, p).real(), aqq = a(q, q).real();
      const double theta = (aqq - app) / (2.0 * g);
      const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                       (std::abs(theta) + std::sqrt(theta * theta + 1.0));
      const double c = 1.0 / std::sqrt(t * t + 1.0);
      const double s = t * c;
      // J = D * R with D = diag(.., conj(phase) at q, ..) and R the real
      // rotation {{c, s}, {-s, c}} on (p, q); A <- J^dagger A J.
      const complex jpp = c, jpq = s, jqp = -s * std::conj(phase),
                    jqq = c * std::conj(phase);
      for (std::size_t k = 0; k < n; ++k) {
        const complex akp = a(k, p), akq = a(k, q);
        a(k, p) = akp * jpp + akq * jqp;
        a(k, q) = akp * jpq + akq * jqq;
      }
      for (std::size_t k = 0; k < n; ++k) {
        const complex apk = a(p, k), aqk = a(q, k);
        a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
        a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
      }
      a(p, q) = a(q, p) = 0.0;
      a(p, p) = a(p, p).real();
      a(q, q) = a(q, q).real();
    }
  }
  return off;
}

}  // namespace detail

/// Real eigenvalues of a Hermitian matrix in descending order (cyclic Jacobi).
inline std::vector<double> eig_hermitian(const ComplexMatrix& m) {
  const double residual = hermiticity_residual(m);
  if (residual > tolerance::eig_input)
    throw InvalidStateError("eig_hermitian: matrix is not Hermitian (residual " +
                            std::to_string(residual) + ")");
  const std::size_t n = m.dim();
  ComplexMatrix a = hermitian_part(m);
  double scale = a.max_abs();
  std::vector<double> values(n);
  if (scale > 0.0) {
    for (int sweep = 0; sweep < 64; ++sweep) {
      if (detail::jacobi_sweep(a) <= 1e-15 * scale) break;
    }
  }
  for (std::size_t i = 0; i < n; ++i) values[i] = a(i, i).real();
  std::sort(values.begin(), values.end(), std::greater<>());
  return values;
}

/// Sum of |eigenvalues| of a Hermitian matrix.
inline double trace_norm(const ComplexMatrix& m) {
  const auto values = eig_hermitian(m);
  return std::accumulate(values.begin(), values.end(), 0.0,
                         [](double acc, double v) { return acc + std::abs(v); });
}

/// A validated density operator: Hermitian, unit trace, positive semidefinite.
class DensityOperator {
 public:
  explicit DensityOperator(ComplexMatrix m) : matrix_(std::move(m)) {
    const double herm = hermiticity_residual(matrix_);
    if (herm > tolerance::hermitian)
      throw InvalidStateError("density operator is not Hermitian (residual " +
                              std::to_string(herm) + ")");
    const double tr_err = std::abs(matrix_.trace() - 1.0);
    if (tr_err > tolerance::unit_trace)
      throw InvalidStateError("density operator trace differs from 1 by " +
                              std::to_string(tr_err));
    const double min_eig = eig_hermitian(matrix_).back();
    if (min_eig < -tolerance::psd)
      throw InvalidStateError("density operator has negative eigenvalue " +
                              std::to_string(min_eig));
  }

  static DensityOperator pure(std::span<const complex> psi) {
    return DensityOperator(outer(psi, psi));
  }

  static DensityOperator maximally_mixed(std::size_t dim) {
    return DensityOperator((1.0 / static_cast<double>(dim)) * ComplexMatrix::identity(dim));
  }

  const ComplexMatrix& matrix() const noexcept { return matrix_; }
  std::size_t dim() const noexcept { return matrix_.dim(); }
  const complex& operator()(std::size_t r, std::size_t c) const { return matrix_(r, c); }

 private:
  ComplexMatrix matrix_;
};

inline DensityOperator kron(const DensityOperator& a, const DensityOperator& b) {
  return DensityOperator(kron(a.matrix(), b.matrix()));
}

/// D(rho1, rho2) = 1/2 || rho1 - rho2 ||_1
inline double trace_distance(const DensityOperator& rho1, const DensityOperator& rho2) {
  if (rho1.dim() != rho2.dim())
    throw DimensionError("trace_distance: dimension mismatch " +
                         std::to_string(rho1.dim()) + " vs " + std::to_string(rho2.dim()));
  return std::clamp(0.5 * trace_norm(rho1.matrix() - rho2.matrix()), 0.0, 1.0);
}

struct ControlProjection {
  ComplexMatrix block;  ///< <v| joint |v>, unnormalized
  double probability;   ///< Tr block
};

/// Partial inner product of a (system (x) qubit-control) operator with a
/// control vector: block(s, s') = sum_{c,c'} conj(v_c) joint(s c, s' c') v_c'.
/// Throws PostSelectionError when the outcome probability is below 1e-12.
inline ControlProjection project_control(const DensityOperator& joint, const Qubit& v) {
  if (joint.dim() % 2 != 0)
    throw DimensionError("project_control: joint dimension must be system x qubit");
  const double norm = std::norm(v[0]) + std::norm(v[1]);
  if (std::abs(norm - 1.0) > 1e-12)
    throw DomainError("project_control: control vector is not normalized");
  const std::size_t ns = joint.dim() / 2;
  ComplexMatrix block(ns);
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t sp = 0; sp < ns; ++sp) {
      complex acc = 0.0;
      for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t cp = 0; cp < 2; ++cp)
          acc += std::conj(v[c]) * joint(s * 2 + c, sp * 2 + cp) * v[cp];
      block(s, sp) = acc;
    }
  const double probability = block.trace().real();
  if (probability < tolerance::postselection) throw PostSelectionError(probability);
  return {std::move(block), probability};
}

}  // namespace cohflow
