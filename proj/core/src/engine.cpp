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

#include "qpe/csv.hpp"
#include "qpe/errors.hpp"
#include "qpe/metadynamics.hpp"
#include "qpe/protocol_sim.hpp"

#include "node_step.hpp"

#include <cmath>
#include <limits>

namespace qpe {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int sample_index(const RVector& weights, std::mt19937_64& rng) {
  const double u = uniform01(rng) * weights.sum();
  double acc = 0.0;
  int last = -1;
  for (int i = 0; i < weights.size(); ++i) {
    if (weights(i) <= 0.0) continue;
    last = i;
    acc += weights(i);
    if (u < acc) return i;
  }
  return last;
}

// Joint draw of (symbol, next state) from the row of `state`.
std::pair<int, int> emit(const HmmSource& src, int state, std::mt19937_64& rng) {
  const int n = src.num_states();
  RVector row(src.alphabet_size() * n);
  for (int x = 0; x < src.alphabet_size(); ++x) {
    row.segment(x * n, n) = src.transition(x).row(state).transpose();
  }
  const int k = sample_index(row, rng);
  return {k / n, k % n};
}

int nearest_possible(const detail::NodeStep& step, double w) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& p : step.probabilities) {
    if (p.probability <= kImpossibleTolerance) continue;
    const double v = p.value.to_double();
    const double d = std::isfinite(v) ? std::abs(v - w) : std::numeric_limits<double>::max();
    if (best < 0 || d < best_d) {
      best = p.outcome;
      best_d = d;
    }
  }
  return best < 0 ? step.protocol.nearest(w) : best;
}

}  // namespace

EngineTrace run_engine(const HmmSource& src, const StrategyPolicy& policy, int steps,
                       const EngineConfig& cfg) {
  if (steps < 0) throw ValidationError("step count must be non-negative");
  if (cfg.mode == EngineMode::finite_n && src.dim() != 2) {
    throw ValidationError("finite-N engine mode supports qubit sources only");
  }
  EngineTrace trace;
  trace.source_name = src.name();
  trace.policy = policy;
  trace.mode = cfg.mode;
  trace.n_swaps = cfg.mode == EngineMode::finite_n ? cfg.n_swaps : 0;
  trace.seed = cfg.seed;
  trace.symmetry_offset = cfg.symmetry_offset;

  std::mt19937_64 source_rng(derive_seed(cfg.seed, 0));
  std::mt19937_64 protocol_rng(derive_seed(cfg.seed, 1));

  BeliefState eta = src.initial_belief();
  trace.offset_used = cfg.symmetry_offset > 0.0 && needs_symmetry_breaking(src, policy, eta);
  int state = sample_index(eta.probs(), source_rng);
  double cumulative = 0.0;
  trace.steps.reserve(static_cast<std::size_t>(steps));

  for (int t = 0; t < steps; ++t) {
    EngineStep rec;
    rec.belief = eta.probs();
    rec.offset_target = t == 0 && trace.offset_used;
    const BeliefState target_belief = rec.offset_target ? offset_belief(src, eta, cfg.symmetry_offset) : eta;
    const detail::NodeStep step = detail::node_step(src, policy, eta, target_belief);

    const auto [symbol, next] = emit(src, state, source_rng);
    rec.symbol = symbol;
    rec.latent = next;
    const DensityOperator& sigma = src.output(symbol);

    if (cfg.mode == EngineMode::ideal) {
      const int n = sample_index(step.protocol.eigen_weights(sigma), protocol_rng);
      rec.work = step.protocol.eigen_work()[static_cast<std::size_t>(n)].to_double();
      rec.outcome = step.protocol.outcome_of(n);
    } else {
      const ProtocolPlan plan(step.protocol.target(), src.hamiltonian(), policy.temperature,
                              cfg.n_swaps);
      const ProtocolSample s = plan.run(plan.stage_one_weights(sigma), protocol_rng);
      rec.work = s.work;
      rec.outcome = nearest_possible(step, s.work);
    }
    cumulative += rec.work;
    rec.cumulative = cumulative;
    trace.steps.push_back(std::move(rec));

    eta = detail::branch_update(step, eta, trace.steps.back().outcome, src, policy);
    state = next;
  }
  return trace;
}

double EngineTrace::mean_work() const {
  if (steps.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : steps) sum += s.work;
  return sum / static_cast<double>(steps.size());
}

double EngineTrace::standard_error(int batches) const {
  const auto n = static_cast<std::int64_t>(steps.size());
  if (batches < 2 || n < 2 * batches) return std::numeric_limits<double>::quiet_NaN();
  const std::int64_t size = n / batches;
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    double sum = 0.0;
    for (std::int64_t i = b * size; i < (b + 1) * size; ++i) sum += steps[static_cast<std::size_t>(i)].work;
    means.push_back(sum / static_cast<double>(size));
  }
  double mean = 0.0;
  for (const double m : means) mean += m;
  mean /= batches;
  if (!std::isfinite(mean)) return std::numeric_limits<double>::quiet_NaN();
  double ss = 0.0;
  for (const double m : means) ss += (m - mean) * (m - mean);
  return std::sqrt(ss / (batches - 1) / batches);
}

std::string trace_to_csv(const EngineTrace& trace) {
  const int dim = trace.steps.empty() ? 0 : static_cast<int>(trace.steps.front().belief.size());
  std::vector<std::string> cols{"step"};
  for (int i = 0; i < dim; ++i) cols.push_back("belief_" + std::to_string(i));
  for (const char* c : {"target_kind", "latent", "symbol", "outcome", "work", "cumulative"}) {
    cols.emplace_back(c);
  }
  CsvWriter csv(cols);
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    const EngineStep& s = trace.steps[t];
    std::vector<std::string> row{std::to_string(t)};
    for (int i = 0; i < dim; ++i) row.push_back(format_double(s.belief(i)));
    row.push_back(s.offset_target ? "offset" : to_string(trace.policy.kind));
    row.push_back(std::to_string(s.latent));
    row.push_back(std::to_string(s.symbol));
    row.push_back(std::to_string(s.outcome));
    row.push_back(format_double(s.work));
    row.push_back(format_double(s.cumulative));
    csv.add_row(row);
  }
  return csv.str();
}

}  // namespace qpe
