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

#include "qpe/qmath.hpp"

#include "qpe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qpe {

namespace {

constexpr double kDegeneracyTolerance = 1e-11;
constexpr double kSupportTolerance = 1e-15;
constexpr double kPhaseTolerance = 1e-10;

void fix_phase(Eigen::Ref<CVector> v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    if (mag > kPhaseTolerance) {
      v *= std::conj(v(i)) / mag;
      v(i) = Complex(mag, 0.0);
      return;
    }
  }
}

// Descending lexicographic order on (re, im) of the components.
bool lex_greater(const CVector& a, const CVector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double dr = a(i).real() - b(i).real();
    if (std::abs(dr) > kPhaseTolerance) return dr > 0;
    const double di = a(i).imag() - b(i).imag();
    if (std::abs(di) > kPhaseTolerance) return di > 0;
  }
  return false;
}

// Replaces the columns of `block` (an orthonormal basis of a degenerate
// eigenspace) by the Gram-Schmidt basis of the projected standard basis.
CMatrix canonical_subspace_basis(const CMatrix& block) {
  const Eigen::Index d = block.rows();
  const Eigen::Index k = block.cols();
  const CMatrix projector = block * block.adjoint();
  CMatrix basis(d, k);
  Eigen::Index found = 0;
  for (Eigen::Index i = 0; i < d && found < k; ++i) {
    CVector v = projector.col(i);
    for (Eigen::Index j = 0; j < found; ++j) {
      v -= basis.col(j) * basis.col(j).dot(v);
    }
    const double norm = v.norm();
    if (norm > 1e-8) {
      basis.col(found++) = v / norm;
    }
  }
  if (found < k) return block;
  return basis;
}

}  // namespace

double ExtendedReal::value() const {
  if (!is_finite()) throw std::logic_error("ExtendedReal::value() on infinite value");
  return value_;
}

double ExtendedReal::to_double() const {
  switch (kind_) {
    case Kind::kPosInf:
      return std::numeric_limits<double>::infinity();
    case Kind::kNegInf:
      return -std::numeric_limits<double>::infinity();
    case Kind::kFinite:
      break;
  }
  return value_;
}

std::string ExtendedReal::to_string() const {
  if (is_positive_infinity()) return "+inf";
  if (is_negative_infinity()) return "-inf";
  std::ostringstream os;
  os.precision(17);
  os << value_;
  return os.str();
}

HermitianOperator::HermitianOperator(const CMatrix& m, double tolerance) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw ValidationError("Hermitian operator must be a non-empty square matrix, got " +
                          std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i; j < m.cols(); ++j) {
      const double gap = std::abs(m(i, j) - std::conj(m(j, i)));
      if (!(gap <= tolerance)) {
        std::ostringstream os;
        os << "operator is not Hermitian: |A(" << i << "," << j << ") - conj(A(" << j << ","
           << i << "))| = " << gap << " exceeds " << tolerance;
        throw ValidationError(os.str());
      }
    }
  }
  m_ = 0.5 * (m + m.adjoint());
}

HermitianOperator HermitianOperator::identity(int dim) {
  return HermitianOperator(CMatrix::Identity(dim, dim), Unchecked{});
}

HermitianOperator HermitianOperator::diagonal(std::span<const double> entries) {
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(entries.size()),
                            static_cast<Eigen::Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
  return HermitianOperator(m);
}

double HermitianOperator::expectation(const CVector& v) const {
  return v.dot(m_ * v).real();
}

DensityOperator::DensityOperator(const CMatrix& m) : HermitianOperator(m) {
  const double tr = trace();
  if (std::abs(tr - 1.0) > kTraceTolerance) {
    throw ValidationError("density operator trace " + std::to_string(tr) + " differs from 1");
  }
  const RVector ev = eigenvalues(*this);
  if (ev(ev.size() - 1) < kEigenvalueFloor) {
    throw ValidationError("density operator has negative eigenvalue " +
                          std::to_string(ev(ev.size() - 1)));
  }
}

DensityOperator DensityOperator::pure(const CVector& psi) {
  const double norm = psi.norm();
  if (!(norm > 0.0)) throw ValidationError("pure state vector has zero norm");
  const CVector v = psi / norm;
  return DensityOperator(CMatrix(v * v.adjoint()), Unchecked{});
}

DensityOperator DensityOperator::maximally_mixed(int dim) {
  return DensityOperator(CMatrix(CMatrix::Identity(dim, dim) / static_cast<double>(dim)),
                         Unchecked{});
}

DensityOperator DensityOperator::from_spectrum(const RVector& probabilities,
                                               const CMatrix& vectors) {
  if (vectors.cols() != probabilities.size()) {
    throw ValidationError("spectrum size mismatch");
  }
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    if (probabilities(i) < kEigenvalueFloor) {
      throw ValidationError("negative spectral weight " + std::to_string(probabilities(i)));
    }
  }
  if (std::abs(probabilities.sum() - 1.0) > kTraceTolerance) {
    throw ValidationError("spectral weights do not sum to 1");
  }
  const RVector clipped = probabilities.cwiseMax(0.0);
  CMatrix m = vectors * clipped.cast<Complex>().asDiagonal() * vectors.adjoint();
  return DensityOperator(CMatrix(0.5 * (m + m.adjoint())), Unchecked{});
}

DensityOperator DensityOperator::assume_valid(const CMatrix& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw ValidationError("density operator must be square");
  }
  const double tr = m.trace().real();
  if (std::abs(tr - 1.0) > kTraceTolerance) {
    throw ValidationError("density operator trace " + std::to_string(tr) + " differs from 1");
  }
  return DensityOperator(CMatrix(0.5 * (m + m.adjoint())), Unchecked{});
}

CMatrix Spectrum::reconstruct() const {
  return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
}

Spectrum eig(const HermitianOperator& op) {
  const int d = op.dim();
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(op.matrix());
  if (solver.info() != Eigen::Success) {
    throw ComputationError("Hermitian eigensolver failed to converge");
  }
  Spectrum out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();

  // Canonicalize degenerate clusters, then fix phases.
  const double scale = std::max(1.0, out.eigenvalues.cwiseAbs().maxCoeff());
  int start = 0;
  while (start < d) {
    int end = start + 1;
    while (end < d &&
           out.eigenvalues(start) - out.eigenvalues(end) <= kDegeneracyTolerance * scale) {
      ++end;
    }
    if (end - start > 1) {
      CMatrix block = canonical_subspace_basis(out.eigenvectors.middleCols(start, end - start));
      std::vector<CVector> cols;
      for (int j = 0; j < block.cols(); ++j) {
        CVector v = block.col(j);
        fix_phase(v);
        cols.push_back(std::move(v));
      }
      std::stable_sort(cols.begin(), cols.end(), lex_greater);
      const double mean =
          out.eigenvalues.segment(start, end - start).mean();
      for (int j = 0; j < end - start; ++j) {
        out.eigenvectors.col(start + j) = cols[static_cast<std::size_t>(j)];
        out.eigenvalues(start + j) = mean;
      }
    } else {
      CVector v = out.eigenvectors.col(start);
      fix_phase(v);
      out.eigenvectors.col(start) = v;
    }
    start = end;
  }
  return out;
}

RVector eigenvalues(const HermitianOperator& op) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(op.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw ComputationError("Hermitian eigensolver failed to converge");
  }
  return solver.eigenvalues().reverse();
}

double shannon_entropy(const RVector& probabilities) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    const double p = probabilities(i);
    if (p > 0.0) s -= p * std::log(p);
  }
  return s;
}

double vn_entropy(const DensityOperator& rho) {
  const RVector ev = eigenvalues(rho);
  if (ev(ev.size() - 1) < kEigenvalueFloor) {
    throw ValidationError("entropy of operator with negative eigenvalue");
  }
  return shannon_entropy(ev.cwiseMax(0.0));
}

ExtendedReal cross_log_trace(const DensityOperator& rho, const DensityOperator& tau) {
  if (rho.dim() != tau.dim()) {
    throw ValidationError("cross_log_trace dimension mismatch");
  }
  const Spectrum sp = eig(tau);
  double acc = 0.0;
  for (int k = 0; k < sp.dim(); ++k) {
    const double weight = rho.expectation(sp.eigenvectors.col(k));
    const double mu = sp.eigenvalues(k);
    if (mu <= kSupportTolerance) {
      if (weight > 1e-12) return ExtendedReal::negative_infinity();
      continue;
    }
    acc += weight * std::log(mu);
  }
  return ExtendedReal::finite(acc);
}

ExtendedReal rel_entropy(const DensityOperator& rho, const DensityOperator& tau) {
  const ExtendedReal cross = cross_log_trace(rho, tau);
  if (!cross.is_finite()) return ExtendedReal::positive_infinity();
  return ExtendedReal::finite(-vn_entropy(rho) - cross.value());
}

DensityOperator dephase(const DensityOperator& rho, const Spectrum& basis) {
  if (basis.dim() != rho.dim()) {
    throw ValidationError("dephase: basis dimension " + std::to_string(basis.dim()) +
                          " differs from state dimension " + std::to_string(rho.dim()));
  }
  CMatrix out = CMatrix::Zero(rho.dim(), rho.dim());
  for (int k = 0; k < basis.dim(); ++k) {
    const CVector v = basis.eigenvectors.col(k);
    out += rho.expectation(v) * (v * v.adjoint());
  }
  return DensityOperator::assume_valid(out);
}

namespace {

std::size_t checked_product_dim(std::span<const int> dims, std::size_t cap) {
  std::size_t total = 1;
  for (const int d : dims) {
    total *= static_cast<std::size_t>(d);
    if (total > cap) {
      throw ValidationError("tensor product dimension exceeds cap " + std::to_string(cap));
    }
  }
  return total;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

template <typename Op>
CMatrix kron_all(std::span<const Op> ops, std::size_t cap) {
  if (ops.empty()) throw ValidationError("tensor of an empty list");
  std::vector<int> dims;
  for (const auto& op : ops) dims.push_back(op.dim());
  checked_product_dim(dims, cap);
  CMatrix acc = ops[0].matrix();
  for (std::size_t i = 1; i < ops.size(); ++i) acc = kron(acc, ops[i].matrix());
  return acc;
}

}  // namespace

HermitianOperator tensor(std::span<const HermitianOperator> ops, std::size_t cap) {
  return HermitianOperator(kron_all(ops, cap));
}

DensityOperator tensor(std::span<const DensityOperator> ops, std::size_t cap) {
  return DensityOperator::assume_valid(kron_all(ops, cap));
}

DensityOperator partial_trace(const DensityOperator& rho, std::span<const int> dims,
                              std::span<const int> keep) {
  const std::size_t total = checked_product_dim(dims, std::numeric_limits<std::size_t>::max());
  if (static_cast<std::size_t>(rho.dim()) != total) {
    throw ValidationError("partial_trace: subsystem dimensions do not match operator");
  }
  const int n = static_cast<int>(dims.size());
  std::vector<bool> kept(static_cast<std::size_t>(n), false);
  for (const int k : keep) {
    if (k < 0 || k >= n) throw ValidationError("partial_trace: keep index out of range");
    kept[static_cast<std::size_t>(k)] = true;
  }
  std::size_t dim_keep = 1;
  std::size_t dim_trace = 1;
  for (int i = 0; i < n; ++i) {
    (kept[static_cast<std::size_t>(i)] ? dim_keep : dim_trace) *= static_cast<std::size_t>(dims[i]);
  }
  // full index for (kept multi-index a, traced multi-index b)
  std::vector<std::size_t> full(dim_keep * dim_trace);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    std::size_t a = 0;
    std::size_t b = 0;
    std::size_t stride_a = 1;
    std::size_t stride_b = 1;
    for (int i = n - 1; i >= 0; --i) {
      const auto di = static_cast<std::size_t>(dims[i]);
      const std::size_t digit = rem % di;
      rem /= di;
      if (kept[static_cast<std::size_t>(i)]) {
        a += digit * stride_a;
        stride_a *= di;
      } else {
        b += digit * stride_b;
        stride_b *= di;
      }
    }
    full[a * dim_trace + b] = idx;
  }
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(dim_keep),
                              static_cast<Eigen::Index>(dim_keep));
  const CMatrix& m = rho.matrix();
  for (std::size_t a1 = 0; a1 < dim_keep; ++a1) {
    for (std::size_t a2 = 0; a2 < dim_keep; ++a2) {
      Complex acc = 0.0;
      for (std::size_t b = 0; b < dim_trace; ++b) {
        acc += m(static_cast<Eigen::Index>(full[a1 * dim_trace + b]),
                 static_cast<Eigen::Index>(full[a2 * dim_trace + b]));
      }
      out(static_cast<Eigen::Index>(a1), static_cast<Eigen::Index>(a2)) = acc;
    }
  }
  return DensityOperator::assume_valid(out);
}

DensityOperator gibbs_state(const HermitianOperator& hamiltonian, double temperature) {
  if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
  const Spectrum sp = eig(hamiltonian);
  const double e_min = sp.eigenvalues.minCoeff();
  RVector w(sp.dim());
  for (int n = 0; n < sp.dim(); ++n) w(n) = std::exp(-(sp.eigenvalues(n) - e_min) / temperature);
  w /= w.sum();
  return DensityOperator::from_spectrum(w, sp.eigenvectors);
}

double equilibrium_free_energy(const HermitianOperator& hamiltonian, double temperature) {
  if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
  const RVector ev = eigenvalues(hamiltonian);
  const double e_min = ev.minCoeff();
  double z = 0.0;
  for (Eigen::Index n = 0; n < ev.size(); ++n) z += std::exp(-(ev(n) - e_min) / temperature);
  return e_min - temperature * std::log(z);
}

double frobenius_distance(const CMatrix& a, const CMatrix& b) { return (a - b).norm(); }

}  // namespace qpe
