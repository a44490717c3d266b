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

#include "qpe/bounds.hpp"

#include "qpe/csv.hpp"
#include "qpe/errors.hpp"

#include <algorithm>
#include <cmath>

namespace qpe {

namespace {

// Entropy from the spectrum of a joint matrix; takes the real symmetric path
// when the imaginary part vanishes, which halves the cost for real sources.
double matrix_entropy(const CMatrix& m) {
  RVector values;
  if (m.imag().cwiseAbs().maxCoeff() == 0.0) {
    const RMatrix re = m.real();
    values = Eigen::SelfAdjointEigenSolver<RMatrix>(re, Eigen::EigenvaluesOnly).eigenvalues();
  } else {
    values = Eigen::SelfAdjointEigenSolver<CMatrix>(m, Eigen::EigenvaluesOnly).eigenvalues();
  }
  double s = 0.0;
  for (int i = 0; i < values.size(); ++i) {
    if (values(i) > 0.0) s -= values(i) * std::log(values(i));
  }
  return s;
}

}  // namespace

double FreeEnergyDecomposition::residual() const {
  double local = 0.0;
  for (const double d : local_noneq) local += d;
  return total_relative_entropy - total_correlation - local;
}

FreeEnergyDecomposition free_energy_decomposition(const HmmSource& src, int length,
                                                  std::size_t cap) {
  if (length < 1) throw ValidationError("length must be at least 1");
  const DensityOperator joint = joint_state(src, length, cap);
  const int d = src.dim();
  const DensityOperator gamma = gibbs_state(src.hamiltonian());
  std::vector<int> dims(static_cast<std::size_t>(length), d);
  std::vector<DensityOperator> marginals;
  std::vector<DensityOperator> gibbs(static_cast<std::size_t>(length), gamma);
  FreeEnergyDecomposition out;
  out.length = length;
  out.eq_free_energy = length * equilibrium_free_energy(src.hamiltonian());
  for (int l = 0; l < length; ++l) {
    const int keep[] = {l};
    marginals.push_back(partial_trace(joint, dims, keep));
    const ExtendedReal dl = rel_entropy(marginals.back(), gamma);
    if (!dl.is_finite()) throw ComputationError("marginal not supported by the Gibbs state");
    out.local_noneq.push_back(dl.value());
  }
  const ExtendedReal total = rel_entropy(joint, tensor(std::span<const DensityOperator>(gibbs), cap));
  const ExtendedReal corr =
      rel_entropy(joint, tensor(std::span<const DensityOperator>(marginals), cap));
  if (!total.is_finite() || !corr.is_finite()) {
    throw ComputationError("joint state not supported by the reference product state");
  }
  out.total_relative_entropy = total.value();
  out.total_correlation = corr.value();
  return out;
}

double EntropyProfile::excess_at(int l) const {
  if (l <= 0 || excess.empty()) return 0.0;
  return excess[static_cast<std::size_t>(std::min(l, max_length()) - 1)];
}

EntropyProfile profile_from_block_entropies(std::vector<double> block_entropy) {
  if (block_entropy.empty()) throw ValidationError("need at least one block entropy");
  EntropyProfile p;
  p.block_entropy = std::move(block_entropy);
  const std::size_t n = p.block_entropy.size();
  for (std::size_t l = 0; l < n; ++l) {
    p.rate.push_back(l == 0 ? p.block_entropy[0] : p.block_entropy[l] - p.block_entropy[l - 1]);
  }
  p.entropy_rate_estimate = p.rate.back();
  p.convergence_gap = n > 1 ? p.rate[n - 2] - p.rate[n - 1] : 0.0;
  double acc = 0.0;
  for (const double s : p.rate) {
    acc += s - p.entropy_rate_estimate;
    p.excess.push_back(acc);
  }
  return p;
}

EntropyProfile entropy_profile(const HmmSource& src, int max_length, std::size_t cap) {
  if (max_length < 1) throw ValidationError("max_length must be at least 1");
  JointStateBuilder builder(src, cap);
  std::vector<double> block;
  for (int l = 1; l <= max_length; ++l) {
    builder.extend();
    block.push_back(matrix_entropy(builder.joint_matrix()));
  }
  return profile_from_block_entropies(std::move(block));
}

WorkBracket w_ideal(const HmmSource& src, const EntropyProfile& profile, double temperature) {
  if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
  const DensityOperator xi0 = joint_state(src, 1);
  const ExtendedReal d = rel_entropy(xi0, gibbs_state(src.hamiltonian(), temperature));
  if (!d.is_finite()) throw ComputationError("single-site state not supported by the Gibbs state");
  WorkBracket b;
  b.lower = temperature * (vn_entropy(xi0) - profile.entropy_rate_estimate + d.value());
  b.upper = b.lower + temperature * std::max(0.0, profile.convergence_gap);
  return b;
}

double qipsl_consumption_bound(const HmmSource& src, const EntropyProfile& profile, int t,
                               int length, double temperature) {
  if (t < 0) throw ValidationError("t must be non-negative");
  const WorkBracket b = w_ideal(src, profile, temperature);
  const double drop = profile.excess_at(length) - profile.excess_at(length - t);
  return t * b.upper - temperature * std::max(0.0, drop);
}

PowerBounds power_bounds(double work_per_operation, double tau0, double c, double kappa,
                         double ops_per_time, double temperature) {
  if (!(tau0 > 0.0)) throw ValidationError("tau0 must be positive");
  if (c < 0.0 || kappa < 0.0) throw ValidationError("c and kappa must be non-negative");
  if (ops_per_time < 0.0 || ops_per_time * tau0 > 1.0 + 1e-12) {
    throw ValidationError("operation rate must lie in [0, 1/tau0]");
  }
  PowerBounds p;
  p.upper = ops_per_time * work_per_operation;
  p.power = ops_per_time * (work_per_operation - c * temperature / (kappa + tau0));
  p.lower = ops_per_time * work_per_operation - c * temperature / (tau0 * tau0);
  return p;
}

std::string profile_to_csv(const EntropyProfile& profile) {
  CsvWriter csv({"length", "block_entropy", "rate", "excess"});
  for (int l = 0; l < profile.max_length(); ++l) {
    const auto i = static_cast<std::size_t>(l);
    csv.add_row({std::to_string(l + 1), format_double(profile.block_entropy[i]),
                 format_double(profile.rate[i]), format_double(profile.excess[i])});
  }
  return csv.str();
}

}  // namespace qpe
