// Copyright 2026 The qpe Authors
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

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace qpe {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kTraceTolerance = 1e-10;
inline constexpr double kEigenvalueFloor = -1e-10;
inline constexpr std::size_t kDefaultDimensionCap = 4096;

/// Real number extended with explicit +/- infinity. Relative entropies with
/// a support violation and work values of zero-weight eigenvectors use the
/// infinite variants instead of floating overflow.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;

  static constexpr ExtendedReal finite(double v) { return ExtendedReal(v, Kind::kFinite); }
  static constexpr ExtendedReal positive_infinity() { return ExtendedReal(0.0, Kind::kPosInf); }
  static constexpr ExtendedReal negative_infinity() { return ExtendedReal(0.0, Kind::kNegInf); }

  constexpr bool is_finite() const { return kind_ == Kind::kFinite; }
  constexpr bool is_positive_infinity() const { return kind_ == Kind::kPosInf; }
  constexpr bool is_negative_infinity() const { return kind_ == Kind::kNegInf; }

  /// Finite value; throws std::logic_error for the infinite variants.
  double value() const;
  /// Value as a double, mapping the infinite variants to +/-inf.
  double to_double() const;

  std::string to_string() const;

  friend bool operator==(const ExtendedReal&, const ExtendedReal&) = default;

 private:
  enum class Kind { kFinite, kPosInf, kNegInf };
  constexpr ExtendedReal(double v, Kind k) : value_(v), kind_(k) {}
  double value_ = 0.0;
  Kind kind_ = Kind::kFinite;
};

/// Finite-dimensional complex Hermitian matrix. Construction validates
/// Hermiticity and stores the exactly symmetrized matrix.
class HermitianOperator {
 public:
  explicit HermitianOperator(const CMatrix& m, double tolerance = kHermitianTolerance);

  static HermitianOperator identity(int dim);
  static HermitianOperator diagonal(std::span<const double> entries);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  Complex operator()(int i, int j) const { return m_(i, j); }
  double trace() const { return m_.trace().real(); }

  /// <v|A|v> for a column vector v.
  double expectation(const CVector& v) const;

 protected:
  struct Unchecked {};
  HermitianOperator(CMatrix m, Unchecked) : m_(std::move(m)) {}

  CMatrix m_;
};

/// Hermitian, unit trace, positive semidefinite (eigenvalues >= -1e-10).
class DensityOperator : public HermitianOperator {
 public:
  explicit DensityOperator(const CMatrix& m);

  static DensityOperator pure(const CVector& psi);
  static DensityOperator maximally_mixed(int dim);
  /// Spectral assembly sum_n p_n |v_n><v_n|; probabilities are validated.
  static DensityOperator from_spectrum(const RVector& probabilities, const CMatrix& vectors);

  /// For operators produced from valid ones by trace- and positivity-
  /// preserving maps (mixtures, products, partial traces). Symmetrizes and
  /// checks the trace but skips the eigenvalue check.
  static DensityOperator assume_valid(const CMatrix& m);

 private:
  DensityOperator(CMatrix m, Unchecked) : HermitianOperator(std::move(m), Unchecked{}) {}
};

/// Eigendecomposition with descending eigenvalues and orthonormal columns.
struct Spectrum {
  RVector eigenvalues;
  CMatrix eigenvectors;

  int dim() const { return static_cast<int>(eigenvalues.size()); }
  CVector vector(int n) const { return eigenvectors.col(n); }
  CMatrix reconstruct() const;
};

/// Deterministic Hermitian eigendecomposition. Eigenvalues are sorted in
/// descending order. Each eigenvector is phase-fixed so its first
/// non-negligible component is real and positive; degenerate eigenspaces
/// get the Gram-Schmidt basis of the projected standard basis, and ties are
/// then ordered lexicographically.
Spectrum eig(const HermitianOperator& op);

/// Eigenvalues only, descending.
RVector eigenvalues(const HermitianOperator& op);

/// Von Neumann entropy in nats. Eigenvalues in [-1e-10, 0] contribute zero.
double vn_entropy(const DensityOperator& rho);
/// Shannon entropy in nats of a (clipped) probability vector.
double shannon_entropy(const RVector& probabilities);

/// D[rho || tau] in nats, +infinity when supp(rho) is not inside supp(tau).
ExtendedReal rel_entropy(const DensityOperator& rho, const DensityOperator& tau);

/// Tr(rho ln tau); -infinity on a support violation.
ExtendedReal cross_log_trace(const DensityOperator& rho, const DensityOperator& tau);

/// sum_k |v_k><v_k| rho |v_k><v_k| over the basis columns.
DensityOperator dephase(const DensityOperator& rho, const Spectrum& basis);

/// Kronecker product; rejects results larger than `cap`.
HermitianOperator tensor(std::span<const HermitianOperator> ops,
                         std::size_t cap = kDefaultDimensionCap);
DensityOperator tensor(std::span<const DensityOperator> ops,
                       std::size_t cap = kDefaultDimensionCap);

/// Trace out every subsystem not listed in `keep` (indices into `dims`).
DensityOperator partial_trace(const DensityOperator& rho, std::span<const int> dims,
                              std::span<const int> keep);

/// Gibbs state e^{-H/T}/Z with energies in the same units as T.
DensityOperator gibbs_state(const HermitianOperator& hamiltonian, double temperature = 1.0);
/// F = -T ln Tr e^{-H/T}.
double equilibrium_free_energy(const HermitianOperator& hamiltonian, double temperature = 1.0);

/// Frobenius norm of the difference.
double frobenius_distance(const CMatrix& a, const CMatrix& b);

}  // namespace qpe
