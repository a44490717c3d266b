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

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace qpe {

/// Only one schedule exists: occupations move linearly from the target
/// spectrum to the Gibbs weights in N equal increments.
enum class DeltaSchedule { linear };

struct ProtocolConfig {
  int n_swaps = 200;
  DeltaSchedule schedule = DeltaSchedule::linear;
  std::uint64_t seed = 0;
  std::int64_t trajectories = 1;
  /// Worker threads for multi-trajectory helpers. Results do not depend on it.
  int jobs = 1;
};

/// Stateless mixing of (seed, index) into an independent stream seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

struct ProtocolSample {
  double work = 0.0;
  int eigenindex = 0;
  double delta_system_energy = 0.0;
  double delta_bath_energy = 0.0;
};

/// Precomputed two-stage qubit protocol for one target state.
class ProtocolPlan {
 public:
  ProtocolPlan(const DensityOperator& target, const HermitianOperator& hamiltonian,
               double temperature, int n_swaps, DeltaSchedule schedule = DeltaSchedule::linear);

  int n_swaps() const { return static_cast<int>(step_work_.size()); }
  const Spectrum& spectrum() const { return spectrum_; }
  /// Energy levels, ascending.
  const RVector& energies() const { return energies_; }
  /// Stage-one battery credit h_n = <l_n|H|l_n> - E_n.
  double stage_one_credit(int n) const { return stage_one_[static_cast<std::size_t>(n)]; }
  /// Stage-two swap credit at step k (1-based).
  double step_credit(int k) const { return step_work_[static_cast<std::size_t>(k - 1)]; }
  /// Occupation of the excited level of the bath qubit at step k.
  double bath_excited(int k) const { return q1_[static_cast<std::size_t>(k - 1)]; }

  /// Weights <l_n|sigma|l_n>.
  RVector stage_one_weights(const DensityOperator& sigma) const;

  /// One trajectory with the system starting stage two in level n.
  ProtocolSample run_from(int n, std::mt19937_64& rng) const;
  /// One full trajectory given stage-one weights.
  ProtocolSample run(const RVector& weights, std::mt19937_64& rng) const;

  /// Exact mean of stage two conditioned on starting level n.
  double expected_stage_two(int n) const;
  /// Exact mean of a full trajectory.
  double expected_work(const RVector& weights) const;

 private:
  Spectrum spectrum_;
  RVector energies_;
  double gap_ = 0.0;
  std::vector<double> stage_one_;
  std::vector<double> step_work_;
  std::vector<double> bath_gap_;
  std::vector<double> q1_;
  std::vector<std::uint64_t> threshold_;
};

/// Single trajectory for trajectory index `index` of cfg.seed.
ProtocolSample run_protocol(const DensityOperator& target, const DensityOperator& sigma,
                            const HermitianOperator& hamiltonian, const ProtocolConfig& cfg,
                            std::uint64_t index = 0, double temperature = 1.0);

/// cfg.trajectories samples, trajectory i seeded with derive_seed(cfg.seed, i).
std::vector<ProtocolSample> sample_protocol(const ProtocolPlan& plan, const RVector& weights,
                                            const ProtocolConfig& cfg);

struct Histogram {
  double left = 0.0;
  double bin_width = 0.0;
  std::vector<double> mass;
  std::int64_t samples = 0;
  std::int64_t underflow = 0;
  std::int64_t overflow = 0;
  double bin_center(std::size_t i) const { return left + (static_cast<double>(i) + 0.5) * bin_width; }
};

/// Fixed binning; counts outside [left, left + bins * width) are tallied
/// separately and excluded from the normalized masses.
Histogram make_histogram(const std::vector<double>& values, double left, double bin_width,
                         int bins);

struct WorkHistogram {
  Histogram histogram;
  /// Fraction of samples nearest to each merged ideal outcome.
  std::vector<double> outcome_mass;
  /// Fraction classified to an outcome other than the one whose eigenindex
  /// produced the sample.
  double misclassification = 0.0;
};

WorkHistogram work_histogram(const DensityOperator& target, const DensityOperator& sigma,
                             const HermitianOperator& hamiltonian, const ProtocolConfig& cfg,
                             double bin_width, double temperature = 1.0);

struct ConvergencePoint {
  int n_swaps = 0;
  double mean = 0.0;
  double standard_error = 0.0;
  double exact_mean = 0.0;
};

/// Mean extracted work with sigma = target for each N. Stage one is
/// stratified: each eigenindex gets cfg.trajectories samples and the
/// stratum means are combined with the exact weights.
std::vector<ConvergencePoint> battery_convergence(const DensityOperator& target,
                                                  const HermitianOperator& hamiltonian,
                                                  const std::vector<int>& n_values,
                                                  const ProtocolConfig& cfg,
                                                  double temperature = 1.0);

struct FitResult {
  double coefficient = 0.0;  // c in deficit = c / N
  double r_squared = 0.0;
};

/// Least-squares fit of deficit = c / N through the origin in 1/N.
FitResult fit_inverse_n(const std::vector<int>& n_values, const std::vector<double>& deficits);

enum class EngineMode { ideal, finite_n };

struct EngineConfig {
  EngineMode mode = EngineMode::ideal;
  int n_swaps = 200;
  std::uint64_t seed = 0;
  double symmetry_offset = 0.01;
};

struct EngineStep {
  RVector belief;     // before the step
  bool offset_target = false;
  int latent = 0;     // latent state after emission
  int symbol = 0;
  int outcome = 0;
  double work = 0.0;
  double cumulative = 0.0;
};

struct EngineTrace {
  std::string source_name;
  StrategyPolicy policy;
  EngineMode mode = EngineMode::ideal;
  int n_swaps = 0;
  std::uint64_t seed = 0;
  double symmetry_offset = 0.0;
  bool offset_used = false;
  std::vector<EngineStep> steps;

  double mean_work() const;
  /// Standard error of the mean from `batches` batch means.
  double standard_error(int batches = 50) const;
};

/// Closed-loop engine: emit, pick a target, extract, update the belief on
/// the realized work.
EngineTrace run_engine(const HmmSource& src, const StrategyPolicy& policy, int steps,
                       const EngineConfig& cfg);

std::string trace_to_csv(const EngineTrace& trace);
std::string histogram_to_csv(const Histogram& histogram);

}  // namespace qpe
