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

#include "qpe/protocol_sim.hpp"

#include "qpe/csv.hpp"
#include "qpe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace qpe {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t probability_threshold(double q) {
  if (q <= 0.0) return 0;
  if (q >= 1.0) return ~std::uint64_t{0};
  const double scaled = std::ldexp(q, 64);
  if (scaled >= 18446744073709551615.0) return ~std::uint64_t{0};
  return static_cast<std::uint64_t>(scaled);
}

template <typename Fn>
void parallel_for(std::int64_t count, int jobs, Fn fn) {
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(std::min<std::int64_t>(count, 256))));
  if (jobs == 1) {
    fn(std::int64_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  const std::int64_t chunk = (count + jobs - 1) / jobs;
  for (int j = 0; j < jobs; ++j) {
    const std::int64_t lo = j * chunk;
    const std::int64_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([=] { fn(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index ^ 0x5851f42d4c957f2dULL));
}

ProtocolPlan::ProtocolPlan(const DensityOperator& target, const HermitianOperator& hamiltonian,
                           double temperature, int n_swaps, DeltaSchedule schedule) {
  if (target.dim() != 2 || hamiltonian.dim() != 2) {
    throw ValidationError("the swap protocol simulator supports qubits only");
  }
  if (n_swaps < 1) throw ValidationError("n_swaps must be at least 1");
  if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
  (void)schedule;
  spectrum_ = eig(target);
  energies_ = eigenvalues(hamiltonian).reverse();
  gap_ = energies_(1) - energies_(0);
  for (int n = 0; n < 2; ++n) {
    stage_one_.push_back(hamiltonian.expectation(spectrum_.eigenvectors.col(n)) - energies_(n));
  }
  const double g1 = 1.0 / (1.0 + std::exp(gap_ / temperature));
  const double g0 = 1.0 - g1;
  const double l0 = std::clamp(spectrum_.eigenvalues(0), 0.0, 1.0);
  const double delta = (l0 - g0) / n_swaps;
  step_work_.reserve(static_cast<std::size_t>(n_swaps));
  for (int k = 1; k <= n_swaps; ++k) {
    const double q0 = k == n_swaps ? g0 : l0 - k * delta;
    const double q1 = k == n_swaps ? g1 : (1.0 - l0) + k * delta;
    if (!(q0 > 0.0 && q0 < 1.0 && q1 > 0.0 && q1 < 1.0)) {
      throw ValidationError("swap schedule produced bath occupations outside (0, 1) at step " +
                            std::to_string(k));
    }
    const double bath_gap = temperature * std::log(q0 / q1);
    bath_gap_.push_back(bath_gap);
    step_work_.push_back(bath_gap - gap_);
    q1_.push_back(q1);
    threshold_.push_back(probability_threshold(q1));
  }
}

RVector ProtocolPlan::stage_one_weights(const DensityOperator& sigma) const {
  if (sigma.dim() != 2) throw ValidationError("input state must be a qubit");
  RVector w(2);
  for (int n = 0; n < 2; ++n) w(n) = std::max(0.0, sigma.expectation(spectrum_.eigenvectors.col(n)));
  return w / w.sum();
}

ProtocolSample ProtocolPlan::run_from(int n, std::mt19937_64& rng) const {
  ProtocolSample out;
  out.eigenindex = n;
  out.work = stage_one_[static_cast<std::size_t>(n)];
  out.delta_system_energy = -stage_one_[static_cast<std::size_t>(n)];
  // Only the bath sum is accumulated; the system change telescopes to
  // gap * (s_final - n) and the swap credits are bath gap minus system gap.
  int s = n;
  double bath_gain = 0.0;
  const std::size_t steps = step_work_.size();
  for (std::size_t k = 0; k < steps; ++k) {
    const int b = rng() < threshold_[k] ? 1 : 0;
    bath_gain += static_cast<double>(b - s) * bath_gap_[k];
    s = b;
  }
  const double sys = gap_ * static_cast<double>(s - n);
  const double bath = -bath_gain;
  out.work += bath_gain - sys;
  out.delta_system_energy += sys;
  out.delta_bath_energy = bath;
  return out;
}

ProtocolSample ProtocolPlan::run(const RVector& weights, std::mt19937_64& rng) const {
  const double u = uniform01(rng) * (weights(0) + weights(1));
  const int n = (u < weights(0) || weights(1) <= 0.0) ? 0 : 1;
  return run_from(n, rng);
}

double ProtocolPlan::expected_stage_two(int n) const {
  const double l0 = std::clamp(spectrum_.eigenvalues(0), 0.0, 1.0);
  const double delta = (q1_.size() > 0) ? (q1_.back() - (1.0 - l0)) / static_cast<double>(q1_.size()) : 0.0;
  double sum = 0.0;
  for (const double h : step_work_) sum += h;
  const double first = step_work_.front();
  return delta * sum + (n == 0 ? first * (1.0 - l0) : -first * l0);
}

double ProtocolPlan::expected_work(const RVector& weights) const {
  const double total = weights(0) + weights(1);
  double acc = 0.0;
  for (int n = 0; n < 2; ++n) {
    acc += weights(n) / total * (stage_one_[static_cast<std::size_t>(n)] + expected_stage_two(n));
  }
  return acc;
}

ProtocolSample run_protocol(const DensityOperator& target, const DensityOperator& sigma,
                            const HermitianOperator& hamiltonian, const ProtocolConfig& cfg,
                            std::uint64_t index, double temperature) {
  const ProtocolPlan plan(target, hamiltonian, temperature, cfg.n_swaps, cfg.schedule);
  std::mt19937_64 rng(derive_seed(cfg.seed, index));
  return plan.run(plan.stage_one_weights(sigma), rng);
}

std::vector<ProtocolSample> sample_protocol(const ProtocolPlan& plan, const RVector& weights,
                                            const ProtocolConfig& cfg) {
  if (cfg.trajectories < 0) throw ValidationError("trajectory count must be non-negative");
  std::vector<ProtocolSample> out(static_cast<std::size_t>(cfg.trajectories));
  parallel_for(cfg.trajectories, cfg.jobs, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
      out[static_cast<std::size_t>(i)] = plan.run(weights, rng);
    }
  });
  return out;
}

Histogram make_histogram(const std::vector<double>& values, double left, double bin_width,
                         int bins) {
  if (!(bin_width > 0.0) || bins < 1) throw ValidationError("histogram needs positive bins");
  Histogram h;
  h.left = left;
  h.bin_width = bin_width;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
  for (const double v : values) {
    const double pos = std::floor((v - left) / bin_width);
    if (!(pos >= 0.0)) {
      ++h.underflow;
    } else if (pos >= bins) {
      ++h.overflow;
    } else {
      ++counts[static_cast<std::size_t>(pos)];
    }
  }
  h.samples = static_cast<std::int64_t>(values.size());
  const std::int64_t inside = h.samples - h.underflow - h.overflow;
  h.mass.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    h.mass[i] = inside > 0 ? static_cast<double>(counts[i]) / static_cast<double>(inside) : 0.0;
  }
  return h;
}

WorkHistogram work_histogram(const DensityOperator& target, const DensityOperator& sigma,
                             const HermitianOperator& hamiltonian, const ProtocolConfig& cfg,
                             double bin_width, double temperature) {
  const ProtocolPlan plan(target, hamiltonian, temperature, cfg.n_swaps, cfg.schedule);
  const IdealProtocol ideal = build_protocol(target, hamiltonian, temperature);
  const std::vector<ProtocolSample> samples = sample_protocol(plan, plan.stage_one_weights(sigma), cfg);
  std::vector<double> values;
  values.reserve(samples.size());
  for (const auto& s : samples) values.push_back(s.work);
  WorkHistogram out;
  if (values.empty()) return out;
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double left = std::floor(*mn / bin_width) * bin_width;
  const int bins = static_cast<int>(std::floor((*mx - left) / bin_width)) + 1;
  out.histogram = make_histogram(values, left, bin_width, bins);
  out.outcome_mass.assign(static_cast<std::size_t>(ideal.num_outcomes()), 0.0);
  std::int64_t wrong = 0;
  for (const auto& s : samples) {
    const int k = ideal.nearest(s.work);
    out.outcome_mass[static_cast<std::size_t>(k)] += 1.0;
    if (k != ideal.outcome_of(s.eigenindex)) ++wrong;
  }
  for (double& m : out.outcome_mass) m /= static_cast<double>(samples.size());
  out.misclassification = static_cast<double>(wrong) / static_cast<double>(samples.size());
  return out;
}

std::vector<ConvergencePoint> battery_convergence(const DensityOperator& target,
                                                  const HermitianOperator& hamiltonian,
                                                  const std::vector<int>& n_values,
                                                  const ProtocolConfig& cfg, double temperature) {
  if (cfg.trajectories < 2) throw ValidationError("battery_convergence needs >= 2 trajectories");
  std::vector<ConvergencePoint> out;
  for (const int n_swaps : n_values) {
    const ProtocolPlan plan(target, hamiltonian, temperature, n_swaps, cfg.schedule);
    const RVector lambda = plan.stage_one_weights(target);
    const std::uint64_t base = derive_seed(cfg.seed, static_cast<std::uint64_t>(n_swaps));
    ConvergencePoint pt;
    pt.n_swaps = n_swaps;
    double var = 0.0;
    for (int n = 0; n < 2; ++n) {
      if (lambda(n) <= 0.0) continue;
      std::vector<double> works(static_cast<std::size_t>(cfg.trajectories));
      parallel_for(cfg.trajectories, cfg.jobs, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) {
          std::mt19937_64 rng(derive_seed(base, static_cast<std::uint64_t>(n * cfg.trajectories + i)));
          works[static_cast<std::size_t>(i)] = plan.run_from(n, rng).work;
        }
      });
      double mean = 0.0;
      for (const double w : works) mean += w;
      mean /= static_cast<double>(works.size());
      double ss = 0.0;
      for (const double w : works) ss += (w - mean) * (w - mean);
      const double sample_var = ss / static_cast<double>(works.size() - 1);
      pt.mean += lambda(n) * mean;
      var += lambda(n) * lambda(n) * sample_var / static_cast<double>(works.size());
    }
    pt.standard_error = std::sqrt(var);
    pt.exact_mean = plan.expected_work(lambda);
    out.push_back(pt);
  }
  return out;
}

FitResult fit_inverse_n(const std::vector<int>& n_values, const std::vector<double>& deficits) {
  if (n_values.size() != deficits.size() || n_values.size() < 2) {
    throw ValidationError("fit needs matching inputs with at least two points");
  }
  double sxx = 0.0;
  double sxy = 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    const double x = 1.0 / n_values[i];
    sxx += x * x;
    sxy += x * deficits[i];
    mean += deficits[i];
  }
  mean /= static_cast<double>(deficits.size());
  FitResult fit;
  fit.coefficient = sxy / sxx;
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    const double pred = fit.coefficient / n_values[i];
    ss_res += (deficits[i] - pred) * (deficits[i] - pred);
    ss_tot += (deficits[i] - mean) * (deficits[i] - mean);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

std::string histogram_to_csv(const Histogram& histogram) {
  CsvWriter csv({"bin_left", "bin_right", "mass"});
  for (std::size_t i = 0; i < histogram.mass.size(); ++i) {
    const double left = histogram.left + static_cast<double>(i) * histogram.bin_width;
    csv.add_row({format_double(left), format_double(left + histogram.bin_width),
                 format_double(histogram.mass[i])});
  }
  return csv.str();
}

}  // namespace qpe
