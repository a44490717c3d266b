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

#include "qpe/source.hpp"

#include <string>
#include <vector>

namespace qpe {

struct FreeEnergyDecomposition {
  int length = 0;
  double eq_free_energy = 0.0;       // L * F
  double total_relative_entropy = 0.0;  // D[rho^(1:L) || gamma^{(x)L}]
  double total_correlation = 0.0;    // D[rho^(1:L) || (x)_l rho^(l)]
  std::vector<double> local_noneq;   // D[rho^(l) || gamma]
  double residual() const;
};

FreeEnergyDecomposition free_energy_decomposition(const HmmSource& src, int length,
                                                  std::size_t cap = kDefaultDimensionCap);

struct EntropyProfile {
  std::vector<double> block_entropy;  // S(rho^(1:l)), l = 1..L_max
  std::vector<double> rate;           // s_l, with s_1 = S(rho^(1))
  std::vector<double> excess;         // E_l = sum_{n<=l} (s_n - s_Lmax)
  double entropy_rate_estimate = 0.0; // s_Lmax, an upper bound on s_vN
  double convergence_gap = 0.0;       // s_{Lmax-1} - s_Lmax
  int max_length() const { return static_cast<int>(block_entropy.size()); }
  /// E_l with l clamped to [0, L_max].
  double excess_at(int l) const;
};

/// Exact block entropies up to max_length (eigenvalues only).
EntropyProfile entropy_profile(const HmmSource& src, int max_length = 10,
                               std::size_t cap = std::size_t{1} << 10);
/// Assembles a profile from precomputed block entropies.
EntropyProfile profile_from_block_entropies(std::vector<double> block_entropy);

struct WorkBracket {
  double lower = 0.0;  // with s_vN replaced by s_Lmax
  double upper = 0.0;  // with s_Lmax minus the convergence gap
};

/// w_ideal / kT = S(xi_0) - s_vN + D[xi_0 || gamma], bracketed.
WorkBracket w_ideal(const HmmSource& src, const EntropyProfile& profile, double temperature = 1.0);

/// t * w_ideal(upper) - max(0, E_L - E_{L-t}); the memory-pattern mutual
/// information is replaced by its floor of zero.
double qipsl_consumption_bound(const HmmSource& src, const EntropyProfile& profile, int t,
                               int length, double temperature = 1.0);

struct PowerBounds {
  double upper = 0.0;
  double power = 0.0;
  double lower = 0.0;
};

/// rate W >= rate (W - c T / (kappa + tau0)) >= rate W - c T / tau0^2 with
/// rate = operations per unit time <= 1 / tau0.
PowerBounds power_bounds(double work_per_operation, double tau0, double c, double kappa,
                         double ops_per_time, double temperature = 1.0);

std::string profile_to_csv(const EntropyProfile& profile);

}  // namespace qpe
