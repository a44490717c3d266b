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
#include "qpe/extraction.hpp"
#include "qpe/source.hpp"

#include <string>
#include <vector>

namespace qpe {

/// Normalizers at or below this make an observation impossible.
inline constexpr double kImpossibleTolerance = 1e-14;

/// xi = sum_x (eta T^(x) 1) sigma^(x).
DensityOperator expected_state(const BeliefState& eta, const HmmSource& src);

/// Pr(x | eta) = eta T^(x) 1.
RVector symbol_probabilities(const BeliefState& eta, const HmmSource& src);

/// lik(o, x) table: rows are outcomes, columns symbols. Every column sums
/// to one.
class PovmLikelihood {
 public:
  PovmLikelihood(RMatrix table, std::vector<std::string> labels = {});

  int num_outcomes() const { return static_cast<int>(table_.rows()); }
  int num_symbols() const { return static_cast<int>(table_.cols()); }
  const RMatrix& table() const { return table_; }
  std::string label(int outcome) const;

 private:
  RMatrix table_;
  std::vector<std::string> labels_;
};

/// eta' = sum_x lik(o,x) eta T^(x) / z. Throws ImpossibleObservationError
/// when z <= kImpossibleTolerance.
BeliefState update_povm(const BeliefState& eta, int outcome, const PovmLikelihood& lik,
                        const HmmSource& src);

/// Likelihood induced by an ideal protocol: lik(w, x) is the weight of
/// sigma^(x) on the eigenvectors whose work value is w.
PovmLikelihood work_likelihood(const IdealProtocol& protocol, const HmmSource& src);

/// Belief update conditioned on an observed work value.
BeliefState update_work(const BeliefState& eta, double w, const IdealProtocol& protocol,
                        const HmmSource& src);
/// Same, addressed by merged outcome index (needed for the -inf outcome).
BeliefState update_work_outcome(const BeliefState& eta, int outcome,
                                const IdealProtocol& protocol, const HmmSource& src);

/// Pr(w | eta) for every outcome of the protocol, from xi(eta).
std::vector<WorkProbability> transition_probs(const BeliefState& eta,
                                              const IdealProtocol& protocol,
                                              const HmmSource& src);

}  // namespace qpe
