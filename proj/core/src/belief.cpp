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

#include "qpe/belief.hpp"

#include "qpe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qpe {

BeliefState::BeliefState(RVector probs) : p_(std::move(probs)) {
  if (p_.size() == 0) throw ValidationError("belief state must be non-empty");
  for (Eigen::Index i = 0; i < p_.size(); ++i) {
    if (!std::isfinite(p_(i))) throw ValidationError("belief component is not finite");
    if (p_(i) < -kBeliefClipTolerance) {
      std::ostringstream os;
      os << "belief component " << i << " is negative (" << p_(i) << ")";
      throw ValidationError(os.str());
    }
    if (p_(i) < 0.0) p_(i) = 0.0;
  }
  const double sum = p_.sum();
  if (std::abs(sum - 1.0) > kBeliefSumTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "belief components sum to " << sum << ", expected 1";
    throw ValidationError(os.str());
  }
  p_ /= sum;
}

BeliefState BeliefState::uniform(int num_states) {
  if (num_states < 1) throw ValidationError("belief state must be non-empty");
  return BeliefState(RVector::Constant(num_states, 1.0 / num_states));
}

BeliefState BeliefState::point(int num_states, int state) {
  if (state < 0 || state >= num_states) throw ValidationError("point belief index out of range");
  RVector v = RVector::Zero(num_states);
  v(state) = 1.0;
  return BeliefState(v);
}

double l1_distance(const BeliefState& a, const BeliefState& b) {
  if (a.size() != b.size()) throw ValidationError("belief sizes differ");
  return (a.probs() - b.probs()).lpNorm<1>();
}

namespace {

void check_dims(const BeliefState& eta, const HmmSource& src) {
  if (eta.size() != src.num_states()) {
    throw ValidationError("belief has " + std::to_string(eta.size()) + " components, source has " +
                          std::to_string(src.num_states()) + " states");
  }
}

}  // namespace

RVector symbol_probabilities(const BeliefState& eta, const HmmSource& src) {
  check_dims(eta, src);
  RVector out(src.alphabet_size());
  for (int x = 0; x < src.alphabet_size(); ++x) {
    out(x) = (eta.probs().transpose() * src.transition(x)).sum();
  }
  return out;
}

DensityOperator expected_state(const BeliefState& eta, const HmmSource& src) {
  const RVector probs = symbol_probabilities(eta, src);
  CMatrix xi = CMatrix::Zero(src.dim(), src.dim());
  for (int x = 0; x < src.alphabet_size(); ++x) xi += probs(x) * src.output(x).matrix();
  return DensityOperator::assume_valid(xi / probs.sum());
}

PovmLikelihood::PovmLikelihood(RMatrix table, std::vector<std::string> labels)
    : table_(std::move(table)), labels_(std::move(labels)) {
  if (table_.rows() == 0 || table_.cols() == 0) throw ValidationError("empty likelihood table");
  for (Eigen::Index x = 0; x < table_.cols(); ++x) {
    for (Eigen::Index o = 0; o < table_.rows(); ++o) {
      const double v = table_(o, x);
      if (!(v >= -1e-12 && v <= 1.0 + 1e-12)) {
        throw ValidationError("likelihood entry outside [0, 1]");
      }
      table_(o, x) = std::clamp(v, 0.0, 1.0);
    }
    const double sum = table_.col(x).sum();
    if (std::abs(sum - 1.0) > 1e-10) {
      throw ValidationError("likelihood column " + std::to_string(x) + " sums to " +
                            std::to_string(sum));
    }
  }
  if (!labels_.empty() && static_cast<Eigen::Index>(labels_.size()) != table_.rows()) {
    throw ValidationError("likelihood label count differs from outcome count");
  }
}

std::string PovmLikelihood::label(int outcome) const {
  if (!labels_.empty()) return labels_[static_cast<std::size_t>(outcome)];
  return "outcome " + std::to_string(outcome);
}

BeliefState update_povm(const BeliefState& eta, int outcome, const PovmLikelihood& lik,
                        const HmmSource& src) {
  check_dims(eta, src);
  if (lik.num_symbols() != src.alphabet_size()) {
    throw ValidationError("likelihood symbol count differs from source alphabet");
  }
  if (outcome < 0 || outcome >= lik.num_outcomes()) {
    throw ValidationError("outcome index out of range");
  }
  RVector next = RVector::Zero(src.num_states());
  for (int x = 0; x < src.alphabet_size(); ++x) {
    const double l = lik.table()(outcome, x);
    if (l == 0.0) continue;
    next += l * (eta.probs().transpose() * src.transition(x)).transpose();
  }
  const double z = next.sum();
  if (!(z > kImpossibleTolerance)) throw ImpossibleObservationError(lik.label(outcome), z);
  return BeliefState(next / z);
}

PovmLikelihood work_likelihood(const IdealProtocol& protocol, const HmmSource& src) {
  if (protocol.dim() != src.dim()) throw ValidationError("protocol and source dimensions differ");
  const int no = protocol.num_outcomes();
  RMatrix table = RMatrix::Zero(no, src.alphabet_size());
  for (int x = 0; x < src.alphabet_size(); ++x) {
    const RVector w = protocol.eigen_weights(src.output(x));
    for (int n = 0; n < w.size(); ++n) table(protocol.outcome_of(n), x) += w(n);
    // Renormalize away eigensolver rounding.
    table.col(x) /= table.col(x).sum();
  }
  std::vector<std::string> labels;
  for (const WorkOutcome& o : protocol.outcomes()) labels.push_back("w=" + o.value.to_string());
  return PovmLikelihood(std::move(table), std::move(labels));
}

BeliefState update_work_outcome(const BeliefState& eta, int outcome,
                                const IdealProtocol& protocol, const HmmSource& src) {
  return update_povm(eta, outcome, work_likelihood(protocol, src), src);
}

BeliefState update_work(const BeliefState& eta, double w, const IdealProtocol& protocol,
                        const HmmSource& src) {
  const auto outcome = protocol.match(w);
  if (!outcome) {
    std::ostringstream os;
    os.precision(17);
    os << "work value " << w << " matches no protocol outcome";
    throw ValidationError(os.str());
  }
  return update_work_outcome(eta, *outcome, protocol, src);
}

std::vector<WorkProbability> transition_probs(const BeliefState& eta,
                                              const IdealProtocol& protocol,
                                              const HmmSource& src) {
  return work_distribution(protocol, expected_state(eta, src));
}

}  // namespace qpe
