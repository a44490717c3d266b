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

#include "qpe/belief_state.hpp"
#include "qpe/qmath.hpp"
#include "qpe/source.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qpe {

/// Eigenvalues at or below this are exact zeros; their work value is -inf.
inline constexpr double kLambdaFloor = 1e-15;
/// Work values are matched within kWorkMatchTolerance * max(1, |w|).
inline constexpr double kWorkMatchTolerance = 1e-9;

struct WorkOutcome {
  ExtendedReal value;
  std::vector<int> eigenindices;  // ascending
};

/// Ideal (zero entropy production) protocol for a target state.
class IdealProtocol {
 public:
  IdealProtocol(DensityOperator target, const HermitianOperator& hamiltonian,
                double temperature);

  const DensityOperator& target() const { return target_; }
  const Spectrum& spectrum() const { return spectrum_; }
  const HermitianOperator& hamiltonian() const { return hamiltonian_; }
  double temperature() const { return temperature_; }
  double eq_free_energy() const { return free_energy_; }
  int dim() const { return spectrum_.dim(); }

  /// Per-eigenindex work value <l_n|H|l_n> + T ln l_n - F.
  const std::vector<ExtendedReal>& eigen_work() const { return eigen_work_; }
  /// Merged outcomes, ordered by their smallest eigenindex.
  const std::vector<WorkOutcome>& outcomes() const { return outcomes_; }
  int num_outcomes() const { return static_cast<int>(outcomes_.size()); }
  int outcome_of(int eigenindex) const { return outcome_of_[static_cast<std::size_t>(eigenindex)]; }

  /// Outcome whose value lies nearest to w within the matching tolerance.
  std::optional<int> match(double w) const;
  /// Outcome nearest to w with no tolerance (finite-N classification).
  int nearest(double w) const;

  /// Weights <l_n|sigma|l_n> per eigenindex.
  RVector eigen_weights(const DensityOperator& sigma) const;

 private:
  DensityOperator target_;
  HermitianOperator hamiltonian_;
  double temperature_;
  Spectrum spectrum_;
  double free_energy_;
  std::vector<ExtendedReal> eigen_work_;
  std::vector<WorkOutcome> outcomes_;
  std::vector<int> outcome_of_;
};

IdealProtocol build_protocol(const DensityOperator& target, const HermitianOperator& hamiltonian,
                             double temperature = 1.0);

struct WorkProbability {
  int outcome;
  ExtendedReal value;
  double probability;
};

/// Pr(w | sigma) for every merged outcome of the protocol.
std::vector<WorkProbability> work_distribution(const IdealProtocol& protocol,
                                               const DensityOperator& sigma);

/// Probability-weighted work; -inf when sigma has weight on a divergent
/// outcome.
ExtendedReal expected_work(const IdealProtocol& protocol, const DensityOperator& sigma);

enum class StrategyKind { memory_quantum, memory_classical, memoryless, overcommit };
enum class OvercommitMode { finite_n, sentinel };

std::string to_string(StrategyKind kind);
std::optional<StrategyKind> parse_strategy(const std::string& name);
inline constexpr StrategyKind kAllStrategies[] = {
    StrategyKind::memory_quantum, StrategyKind::memory_classical, StrategyKind::memoryless,
    StrategyKind::overcommit};

struct StrategyPolicy {
  StrategyKind kind = StrategyKind::memory_quantum;
  OvercommitMode overcommit_mode = OvercommitMode::finite_n;
  /// Bath interactions used to regularize pure overcommitment targets.
  int overcommit_n = 200;
  double temperature = 1.0;
};

/// Symbol maximizing eta T^(x) 1; ties go to the lowest index.
int most_probable_symbol(const BeliefState& eta, const HmmSource& src);

/// The state the policy bets on: xi(eta), its energy dephasing, xi(pi), or
/// the most probable output.
DensityOperator select_target(const StrategyPolicy& policy, const BeliefState& eta,
                              const HmmSource& src);

/// Replaces zero eigenvalues at spectral position n by
/// e^{-E_n/T} / (N Z) (E ascending) and rescales the rest.
DensityOperator regularize_target(const DensityOperator& target,
                                  const HermitianOperator& hamiltonian, double temperature,
                                  int n_swaps);

/// Target actually handed to the protocol: select_target, regularized for
/// overcommitment in finite-N mode.
DensityOperator protocol_target(const StrategyPolicy& policy, const BeliefState& eta,
                                const HmmSource& src);

}  // namespace qpe
