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

#include "qpe/extraction.hpp"

#include "qpe/belief.hpp"
#include "qpe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qpe {

namespace {

double match_scale(double w) { return kWorkMatchTolerance * std::max(1.0, std::abs(w)); }

}  // namespace

IdealProtocol::IdealProtocol(DensityOperator target, const HermitianOperator& hamiltonian,
                             double temperature)
    : target_(std::move(target)),
      hamiltonian_(hamiltonian),
      temperature_(temperature),
      spectrum_(eig(target_)),
      free_energy_(equilibrium_free_energy(hamiltonian, temperature)) {
  if (hamiltonian.dim() != target_.dim()) {
    throw ValidationError("protocol target and hamiltonian dimensions differ");
  }
  const int d = spectrum_.dim();
  eigen_work_.reserve(static_cast<std::size_t>(d));
  for (int n = 0; n < d; ++n) {
    const double lambda = spectrum_.eigenvalues(n);
    if (lambda <= kLambdaFloor) {
      eigen_work_.push_back(ExtendedReal::negative_infinity());
    } else {
      const double energy = hamiltonian.expectation(spectrum_.eigenvectors.col(n));
      eigen_work_.push_back(
          ExtendedReal::finite(energy + temperature * std::log(lambda) - free_energy_));
    }
  }

  // Merge numerically equal work values: chains of neighbours closer than
  // twice the matching tolerance form one outcome.
  std::vector<int> finite;
  std::vector<int> divergent;
  for (int n = 0; n < d; ++n) {
    (eigen_work_[static_cast<std::size_t>(n)].is_finite() ? finite : divergent).push_back(n);
  }
  std::stable_sort(finite.begin(), finite.end(), [this](int a, int b) {
    return eigen_work_[static_cast<std::size_t>(a)].value() <
           eigen_work_[static_cast<std::size_t>(b)].value();
  });
  std::vector<std::vector<int>> groups;
  for (std::size_t i = 0; i < finite.size(); ++i) {
    const double w = eigen_work_[static_cast<std::size_t>(finite[i])].value();
    if (i > 0) {
      const double prev = eigen_work_[static_cast<std::size_t>(finite[i - 1])].value();
      if (w - prev <= 2.0 * match_scale(w)) {
        groups.back().push_back(finite[i]);
        continue;
      }
    }
    groups.push_back({finite[i]});
  }
  if (!divergent.empty()) groups.push_back(divergent);
  for (auto& g : groups) std::sort(g.begin(), g.end());
  std::sort(groups.begin(), groups.end(),
            [](const std::vector<int>& a, const std::vector<int>& b) { return a.front() < b.front(); });

  outcome_of_.assign(static_cast<std::size_t>(d), -1);
  for (std::size_t k = 0; k < groups.size(); ++k) {
    WorkOutcome o;
    o.eigenindices = groups[k];
    o.value = eigen_work_[static_cast<std::size_t>(groups[k].front())];
    for (const int n : groups[k]) outcome_of_[static_cast<std::size_t>(n)] = static_cast<int>(k);
    outcomes_.push_back(std::move(o));
  }
}

std::optional<int> IdealProtocol::match(double w) const {
  if (std::isnan(w)) return std::nullopt;
  if (std::isinf(w)) {
    for (std::size_t k = 0; k < outcomes_.size(); ++k) {
      const auto& v = outcomes_[k].value;
      if ((w < 0 && v.is_negative_infinity()) || (w > 0 && v.is_positive_infinity())) {
        return static_cast<int>(k);
      }
    }
    return std::nullopt;
  }
  std::optional<int> best;
  double best_gap = 0.0;
  for (std::size_t k = 0; k < outcomes_.size(); ++k) {
    if (!outcomes_[k].value.is_finite()) continue;
    const double gap = std::abs(outcomes_[k].value.value() - w);
    if (gap <= match_scale(w) && (!best || gap < best_gap)) {
      best = static_cast<int>(k);
      best_gap = gap;
    }
  }
  return best;
}

int IdealProtocol::nearest(double w) const {
  if (std::isinf(w) && w < 0) {
    if (const auto m = match(w)) return *m;
  }
  int best = -1;
  double best_gap = 0.0;
  for (std::size_t k = 0; k < outcomes_.size(); ++k) {
    if (!outcomes_[k].value.is_finite()) continue;
    const double gap = std::abs(outcomes_[k].value.value() - w);
    if (best < 0 || gap < best_gap) {
      best = static_cast<int>(k);
      best_gap = gap;
    }
  }
  if (best < 0) return 0;
  return best;
}

RVector IdealProtocol::eigen_weights(const DensityOperator& sigma) const {
  if (sigma.dim() != dim()) throw ValidationError("state and protocol dimensions differ");
  RVector w(dim());
  for (int n = 0; n < dim(); ++n) {
    w(n) = std::max(0.0, sigma.expectation(spectrum_.eigenvectors.col(n)));
  }
  return w;
}

IdealProtocol build_protocol(const DensityOperator& target, const HermitianOperator& hamiltonian,
                             double temperature) {
  if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
  return IdealProtocol(target, hamiltonian, temperature);
}

std::vector<WorkProbability> work_distribution(const IdealProtocol& protocol,
                                               const DensityOperator& sigma) {
  const RVector w = protocol.eigen_weights(sigma);
  std::vector<WorkProbability> out;
  out.reserve(protocol.outcomes().size());
  for (std::size_t k = 0; k < protocol.outcomes().size(); ++k) {
    const WorkOutcome& o = protocol.outcomes()[k];
    double p = 0.0;
    for (const int n : o.eigenindices) p += w(n);
    out.push_back({static_cast<int>(k), o.value, p});
  }
  return out;
}

ExtendedReal expected_work(const IdealProtocol& protocol, const DensityOperator& sigma) {
  double acc = 0.0;
  for (const WorkProbability& wp : work_distribution(protocol, sigma)) {
    if (!wp.value.is_finite()) {
      if (wp.probability > 1e-12) return wp.value;
      continue;
    }
    acc += wp.probability * wp.value.value();
  }
  return ExtendedReal::finite(acc);
}

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::memory_quantum:
      return "memory_quantum";
    case StrategyKind::memory_classical:
      return "memory_classical";
    case StrategyKind::memoryless:
      return "memoryless";
    case StrategyKind::overcommit:
      return "overcommit";
  }
  return "unknown";
}

std::optional<StrategyKind> parse_strategy(const std::string& name) {
  for (const StrategyKind k : kAllStrategies) {
    if (to_string(k) == name) return k;
  }
  if (name == "quantum" || name == "i") return StrategyKind::memory_quantum;
  if (name == "classical" || name == "ii") return StrategyKind::memory_classical;
  if (name == "iii") return StrategyKind::memoryless;
  if (name == "iv") return StrategyKind::overcommit;
  return std::nullopt;
}

int most_probable_symbol(const BeliefState& eta, const HmmSource& src) {
  const RVector probs = symbol_probabilities(eta, src);
  int best = 0;
  for (int x = 1; x < probs.size(); ++x) {
    if (probs(x) > probs(best)) best = x;
  }
  return best;
}

DensityOperator select_target(const StrategyPolicy& policy, const BeliefState& eta,
                              const HmmSource& src) {
  switch (policy.kind) {
    case StrategyKind::memory_quantum:
      return expected_state(eta, src);
    case StrategyKind::memory_classical:
      return dephase(expected_state(eta, src), eig(src.hamiltonian()));
    case StrategyKind::memoryless:
      return expected_state(src.stationary(), src);
    case StrategyKind::overcommit:
      return src.output(most_probable_symbol(eta, src));
  }
  throw ValidationError("unknown strategy");
}

DensityOperator regularize_target(const DensityOperator& target,
                                  const HermitianOperator& hamiltonian, double temperature,
                                  int n_swaps) {
  if (n_swaps < 1) throw ValidationError("regularization needs N >= 1");
  const Spectrum sp = eig(target);
  RVector energies = eigenvalues(hamiltonian).reverse();  // ascending
  const double e_min = energies(0);
  RVector boltz(energies.size());
  for (Eigen::Index n = 0; n < energies.size(); ++n) {
    boltz(n) = std::exp(-(energies(n) - e_min) / temperature);
  }
  boltz /= boltz.sum();
  RVector lambda = sp.eigenvalues;
  double added = 0.0;
  double kept = 0.0;
  std::vector<char> zero(static_cast<std::size_t>(lambda.size()), 0);
  for (Eigen::Index n = 0; n < lambda.size(); ++n) {
    if (lambda(n) <= kLambdaFloor) {
      zero[static_cast<std::size_t>(n)] = 1;
      lambda(n) = boltz(n) / static_cast<double>(n_swaps);
      added += lambda(n);
    } else {
      kept += lambda(n);
    }
  }
  if (added == 0.0) return target;
  for (Eigen::Index n = 0; n < lambda.size(); ++n) {
    if (!zero[static_cast<std::size_t>(n)]) lambda(n) *= (1.0 - added) / kept;
  }
  return DensityOperator::from_spectrum(lambda, sp.eigenvectors);
}

DensityOperator protocol_target(const StrategyPolicy& policy, const BeliefState& eta,
                                const HmmSource& src) {
  DensityOperator target = select_target(policy, eta, src);
  if (policy.kind == StrategyKind::overcommit && policy.overcommit_mode == OvercommitMode::finite_n) {
    return regularize_target(target, src.hamiltonian(), policy.temperature, policy.overcommit_n);
  }
  return target;
}

}  // namespace qpe
