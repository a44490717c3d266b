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

#include "qpe/belief.hpp"
#include "qpe/extraction.hpp"
#include "qpe/source.hpp"

#include <vector>

namespace qpe::detail {

/// Everything a belief node needs for one engine step.
struct NodeStep {
  IdealProtocol protocol;
  PovmLikelihood likelihood;
  std::vector<WorkProbability> probabilities;  // under xi(eta)
};

inline NodeStep node_step(const HmmSource& src, const StrategyPolicy& policy,
                          const BeliefState& eta, const BeliefState& target_belief) {
  IdealProtocol protocol = build_protocol(protocol_target(policy, target_belief, src),
                                          src.hamiltonian(), policy.temperature);
  PovmLikelihood lik = work_likelihood(protocol, src);
  std::vector<WorkProbability> probs = transition_probs(eta, protocol, src);
  return NodeStep{std::move(protocol), std::move(lik), std::move(probs)};
}

inline NodeStep node_step(const HmmSource& src, const StrategyPolicy& policy,
                          const BeliefState& eta) {
  return node_step(src, policy, eta, eta);
}

/// Memoryless engines never update their memory.
inline BeliefState branch_update(const NodeStep& step, const BeliefState& eta, int outcome,
                                 const HmmSource& src, const StrategyPolicy& policy) {
  if (policy.kind == StrategyKind::memoryless) return eta;
  return update_povm(eta, outcome, step.likelihood, src);
}

}  // namespace qpe::detail
