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

#include "qpe/bounds.hpp"
#include "qpe/metadynamics.hpp"
#include "qpe/protocol_sim.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace qpe;

void BM_Eig(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = {n(rng), n(rng)};
  const CMatrix m = a * a.adjoint();
  const DensityOperator rho(m / m.trace().real());
  for (auto _ : state) benchmark::DoNotOptimize(eig(rho));
}
BENCHMARK(BM_Eig)->Arg(2)->Arg(16)->Arg(256);

void BM_EnumerateGraph(benchmark::State& state) {
  const HmmSource src = builtin_perturbed_coin(0.1, 0.1);
  StrategyPolicy policy;
  policy.kind = static_cast<StrategyKind>(state.range(0));
  for (auto _ : state) {
    const BeliefGraph g = enumerate_graph(src, policy);
    benchmark::DoNotOptimize(work_rate(g, stationary_measure(g)));
  }
}
BENCHMARK(BM_EnumerateGraph)
    ->Arg(static_cast<int>(StrategyKind::memory_quantum))
    ->Arg(static_cast<int>(StrategyKind::memory_classical))
    ->Unit(benchmark::kMillisecond);

void BM_ProtocolTrajectory(benchmark::State& state) {
  CMatrix t(2, 2);
  t << 0.85, 0.1, 0.1, 0.15;
  const double e[] = {0.0, 1.0};
  const ProtocolPlan plan(DensityOperator(t), HermitianOperator::diagonal(e), 1.0,
                          static_cast<int>(state.range(0)));
  std::mt19937_64 rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(plan.run_from(0, rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ProtocolTrajectory)->Arg(200)->Arg(5000);

void BM_EngineSteps(benchmark::State& state) {
  const HmmSource src = builtin_perturbed_coin(0.1, 0.1);
  StrategyPolicy policy;
  EngineConfig cfg;
  cfg.mode = state.range(0) == 0 ? EngineMode::ideal : EngineMode::finite_n;
  cfg.seed = 9;
  for (auto _ : state) benchmark::DoNotOptimize(run_engine(src, policy, 1000, cfg));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_EngineSteps)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_EntropyProfile(benchmark::State& state) {
  const HmmSource src = builtin_golden_mean(0.3);
  for (auto _ : state) benchmark::DoNotOptimize(entropy_profile(src, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_EntropyProfile)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
