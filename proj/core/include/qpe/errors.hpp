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

#include <stdexcept>
#include <string>

namespace qpe {

/// Input violates a documented invariant (bad matrix, bad model file, bad
/// parameter range). The CLI maps this to exit status 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation could not complete (non-convergence, impossible
/// observation, exhausted budget). The CLI maps this to exit status 2.
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ImpossibleObservationError : public ComputationError {
 public:
  ImpossibleObservationError(const std::string& outcome, double normalizer)
      : ComputationError("impossible observation '" + outcome +
                         "': normalizer " + std::to_string(normalizer) +
                         " under current belief"),
        outcome_(outcome) {}

  const std::string& outcome() const noexcept { return outcome_; }

 private:
  std::string outcome_;
};

}  // namespace qpe
