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

#include "qpe/qmath.hpp"

namespace qpe {

inline constexpr double kBeliefClipTolerance = 1e-12;
inline constexpr double kBeliefSumTolerance = 1e-10;

/// Probability row vector over latent states. Components in [-1e-12, 0] are
/// clipped to zero and the vector renormalized; anything more negative, or a
/// sum away from 1 by more than 1e-10, is rejected.
class BeliefState {
 public:
  explicit BeliefState(RVector probs);

  static BeliefState uniform(int num_states);
  static BeliefState point(int num_states, int state);

  const RVector& probs() const { return p_; }
  int size() const { return static_cast<int>(p_.size()); }
  double operator[](int i) const { return p_(i); }

 private:
  RVector p_;
};

double l1_distance(const BeliefState& a, const BeliefState& b);

}  // namespace qpe
