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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qpe {

inline constexpr double kRowSumTolerance = 1e-12;

/// Raw, unvalidated description of a hidden Markov source with quantum
/// outputs. transitions[x](s, s') = Pr(s', x | s).
struct SourceDefinition {
  std::string name;
  std::vector<std::string> states;
  std::vector<std::string> alphabet;
  std::vector<RMatrix> transitions;
  std::vector<CMatrix> outputs;
  CMatrix hamiltonian;
  std::optional<RVector> initial_belief;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

/// Checks every source invariant and lists all violations found.
ValidationReport validate(const SourceDefinition& def);

/// Validated, immutable source.
class HmmSource {
 public:
  /// Throws ValidationError carrying the full report on failure.
  static HmmSource from_definition(SourceDefinition def);

  const std::string& name() const { return def_.name; }
  int num_states() const { return static_cast<int>(def_.states.size()); }
  int alphabet_size() const { return static_cast<int>(def_.alphabet.size()); }
  int dim() const { return static_cast<int>(def_.hamiltonian.rows()); }

  const std::vector<std::string>& states() const { return def_.states; }
  const std::vector<std::string>& alphabet() const { return def_.alphabet; }
  const RMatrix& transition(int x) const { return def_.transitions[static_cast<std::size_t>(x)]; }
  const DensityOperator& output(int x) const { return outputs_[static_cast<std::size_t>(x)]; }
  const HermitianOperator& hamiltonian() const { return hamiltonian_; }
  /// sum_x T^(x).
  const RMatrix& markov_matrix() const { return markov_; }
  const BeliefState& stationary() const { return stationary_; }
  /// Declared initial belief, or the stationary distribution.
  const BeliefState& initial_belief() const { return initial_; }
  const SourceDefinition& definition() const { return def_; }

 private:
  HmmSource(SourceDefinition def, std::vector<DensityOperator> outputs,
            HermitianOperator hamiltonian, RMatrix markov, BeliefState stationary,
            BeliefState initial);

  SourceDefinition def_;
  std::vector<DensityOperator> outputs_;
  HermitianOperator hamiltonian_;
  RMatrix markov_;
  BeliefState stationary_;
  BeliefState initial_;
};

/// Stationary distribution of a row-stochastic matrix with a single
/// recurrent class: dense solve up to 8 states, lazy power iteration above.
/// Throws ComputationError if the residual exceeds 1e-12.
RVector stationary_distribution(const RMatrix& markov);

inline const BeliefState& stationary(const HmmSource& src) { return src.stationary(); }

struct Realization {
  std::uint64_t seed = 0;
  std::vector<int> latent_path;  // length + 1 entries, starting with s_0
  std::vector<int> symbol_path;  // length entries
  int length = 0;
};

/// Samples `length` emissions. s_0 is drawn from `initial`.
Realization sample(const HmmSource& src, int length, std::uint64_t seed,
                   const BeliefState& initial);
inline Realization sample(const HmmSource& src, int length, std::uint64_t seed) {
  return sample(src, length, seed, src.stationary());
}

/// Length-L marginal of the output process, started from the stationary
/// distribution.
DensityOperator joint_state(const HmmSource& src, int length,
                            std::size_t cap = kDefaultDimensionCap);

/// Incremental construction of joint states rho^(1:l), l = 1, 2, ...
/// Keeps the per-latent-state unnormalized blocks so each extension costs a
/// single pass over the transition structure.
class JointStateBuilder {
 public:
  explicit JointStateBuilder(const HmmSource& src, std::size_t cap = kDefaultDimensionCap);

  int length() const { return length_; }
  /// Appends one more site; throws ValidationError when the cap is exceeded.
  void extend();
  CMatrix joint_matrix() const;

 private:
  const HmmSource* src_;
  std::size_t cap_;
  int length_ = 0;
  std::vector<CMatrix> blocks_;  // indexed by current latent state
};

/// Perturbed coin: T^(0) = [[1-p,0],[p,0]], T^(1) = [[0,p],[0,1-p]],
/// outputs |0> and sqrt(r)|0> + sqrt(1-r)|1>, H = diag(0, energy_gap).
HmmSource builtin_perturbed_coin(double p, double r, double energy_gap = 1.0);
SourceDefinition perturbed_coin_definition(double p, double r, double energy_gap = 1.0);

/// Three-state golden-mean-style source with the same symbol marginals as the
/// perturbed coin (illustrative parameters).
HmmSource builtin_golden_mean(double r, double energy_gap = 1.0);
SourceDefinition golden_mean_definition(double r, double energy_gap = 1.0);

}  // namespace qpe
