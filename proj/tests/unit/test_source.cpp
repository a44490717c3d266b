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

#include "qpe/errors.hpp"
#include "qpe/model_io.hpp"
#include "qpe/source.hpp"

#include <gtest/gtest.h>

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>

#ifndef QPE_ASSET_DIR
#error "QPE_ASSET_DIR must point at the asset directory"
#endif

using namespace qpe;

namespace {

bool mentions(const ValidationReport& rep, const std::string& needle) {
  for (const auto& v : rep.violations)
    if (v.find(needle) != std::string::npos) return true;
  return false;
}

CMatrix psi_projector(double r) {
  CVector psi(2);
  psi << std::sqrt(r), std::sqrt(1 - r);
  return psi * psi.adjoint();
}

}  // namespace

TEST(Source, PerturbedCoinValidAcrossP) {
  for (int i = 1; i < 20; ++i) {
    const double p = i / 20.0;
    EXPECT_TRUE(validate(perturbed_coin_definition(p, 0.3)).ok()) << p;
  }
}

TEST(Source, PerturbedCoinMatrices) {
  const HmmSource src = builtin_perturbed_coin(0.3, 0.5);
  RMatrix t0(2, 2), t1(2, 2);
  t0 << 0.7, 0, 0.3, 0;
  t1 << 0, 0.3, 0, 0.7;
  EXPECT_EQ(src.transition(0), t0);
  EXPECT_EQ(src.transition(1), t1);
  EXPECT_LT(frobenius_distance(src.output(1).matrix(), psi_projector(0.5)), 1e-15);
  EXPECT_NEAR(src.hamiltonian()(1, 1).real() - src.hamiltonian()(0, 0).real(), 1.0, 0.0);

  const HmmSource iid = builtin_perturbed_coin(0.5, 0.5);
  EXPECT_EQ(iid.markov_matrix().row(0), iid.markov_matrix().row(1));
  const HmmSource same = builtin_perturbed_coin(0.3, 1.0);
  EXPECT_LT(frobenius_distance(same.output(0).matrix(), same.output(1).matrix()), 1e-15);
  EXPECT_THROW(builtin_perturbed_coin(0.0, 0.5), ValidationError);
  EXPECT_THROW(builtin_perturbed_coin(0.5, 1.5), ValidationError);
}

TEST(Source, RowSumViolationNamesRow) {
  SourceDefinition def = perturbed_coin_definition(0.3, 0.5);
  def.transitions[0](1, 0) = 0.2;  // row 1 now sums to 0.9
  const ValidationReport rep = validate(def);
  EXPECT_FALSE(rep.ok());
  EXPECT_TRUE(mentions(rep, "row 1")) << rep.summary();
  EXPECT_THROW(HmmSource::from_definition(def), ValidationError);
}

TEST(Source, NegativeEntryRejected) {
  SourceDefinition def = perturbed_coin_definition(0.3, 0.5);
  def.transitions[0](0, 0) = -0.1;
  def.transitions[1](0, 1) = 1.1;
  const ValidationReport rep = validate(def);
  EXPECT_FALSE(rep.ok());
  EXPECT_TRUE(mentions(rep, "outside [0, 1]"));
}

TEST(Source, ReducibleRejected) {
  SourceDefinition def = perturbed_coin_definition(0.3, 0.5);
  def.transitions[0] << 1, 0, 0, 0;
  def.transitions[1] << 0, 0, 0, 1;
  EXPECT_TRUE(mentions(validate(def), "single recurrent class"));
}

TEST(Source, DimensionMismatchRejected) {
  SourceDefinition def = perturbed_coin_definition(0.3, 0.5);
  def.hamiltonian = CMatrix::Identity(3, 3);
  EXPECT_FALSE(validate(def).ok());
}

TEST(Source, StationaryPerturbedCoin) {
  for (int i = 1; i <= 20; ++i) {
    const double p = (i - 0.5) / 20.0;
    const HmmSource src = builtin_perturbed_coin(p, 0.4);
    EXPECT_NEAR(src.stationary()[0], 0.5, 1e-12);
    EXPECT_NEAR(src.stationary()[1], 0.5, 1e-12);
  }
}

TEST(Source, StationarySingleStateAndGoldenMean) {
  SourceDefinition def;
  def.name = "single";
  def.states = {"s"};
  def.alphabet = {"0", "1"};
  def.transitions = {RMatrix::Constant(1, 1, 0.25), RMatrix::Constant(1, 1, 0.75)};
  def.outputs = {CMatrix::Identity(2, 2) / 2.0, CMatrix::Identity(2, 2) / 2.0};
  def.hamiltonian = CMatrix::Zero(2, 2);
  EXPECT_DOUBLE_EQ(HmmSource::from_definition(def).stationary()[0], 1.0);

  const HmmSource gm = builtin_golden_mean(0.3);
  RVector pi = RVector::Constant(3, 1.0 / 3.0);
  for (int k = 0; k < 10000; ++k) pi = (pi.transpose() * gm.markov_matrix()).transpose();
  EXPECT_LT((gm.stationary().probs() - pi).lpNorm<1>(), 1e-12);
  EXPECT_LT((gm.stationary().probs().transpose() * gm.markov_matrix() -
             gm.stationary().probs().transpose()).lpNorm<1>(), 1e-12);
}

TEST(Source, SampleDeterministicAndForced) {
  const HmmSource src = builtin_perturbed_coin(0.2, 0.5);
  const Realization a = sample(src, 500, 42);
  const Realization b = sample(src, 500, 42);
  EXPECT_EQ(a.symbol_path, b.symbol_path);
  EXPECT_EQ(a.latent_path, b.latent_path);
  EXPECT_EQ(a.latent_path.size(), 501u);
  for (int t = 0; t < a.length; ++t) {
    const int x = a.symbol_path[static_cast<std::size_t>(t)];
    EXPECT_GT(src.transition(x)(a.latent_path[static_cast<std::size_t>(t)],
                                a.latent_path[static_cast<std::size_t>(t) + 1]),
              0.0);
  }

  // Deterministic alternator: from A always emit 1 and move to B, then 0 back to A.
  SourceDefinition alt;
  alt.states = {"A", "B"};
  alt.alphabet = {"0", "1"};
  RMatrix t0 = RMatrix::Zero(2, 2), t1 = RMatrix::Zero(2, 2);
  t1(0, 1) = 1.0;
  t0(1, 0) = 1.0;
  alt.transitions = {t0, t1};
  alt.outputs = {CMatrix::Identity(2, 2) / 2.0, CMatrix::Identity(2, 2) / 2.0};
  alt.hamiltonian = CMatrix::Zero(2, 2);
  const HmmSource altsrc = HmmSource::from_definition(alt);
  const Realization r = sample(altsrc, 4, 7, BeliefState::point(2, 0));
  EXPECT_EQ(r.symbol_path, (std::vector<int>{1, 0, 1, 0}));
}

TEST(Source, SampleFrequenciesWithinBinomialBand) {
  const int n = 100000;
  for (const HmmSource& src : {builtin_perturbed_coin(0.2, 0.5), builtin_golden_mean(0.5)}) {
    const Realization r = sample(src, n, 2024);
    int zeros = 0;
    for (const int x : r.symbol_path) zeros += x == 0;
    // Both sources have Pr(0) = 1/2; correlations widen the band, so use
    // the integrated autocorrelation of the latent chain for the perturbed
    // coin (variance factor (2 - 2p)/(2p) = 4) and the same bound for both.
    const double sigma = std::sqrt(0.25 / n * 4.0);
    EXPECT_NEAR(zeros / static_cast<double>(n), 0.5, 4 * sigma) << src.name();
  }
}

TEST(Source, JointStateMarginals) {
  const HmmSource src = builtin_perturbed_coin(0.3, 0.5);
  const DensityOperator xi0 = joint_state(src, 1);
  const CMatrix expected = 0.5 * (src.output(0).matrix() + src.output(1).matrix());
  EXPECT_LT(frobenius_distance(xi0.matrix(), expected), 1e-14);

  const DensityOperator two = joint_state(src, 2);
  EXPECT_NEAR(two.trace(), 1.0, 1e-12);
  const int dims[] = {2, 2};
  const int k0[] = {0};
  const int k1[] = {1};
  EXPECT_LT(frobenius_distance(partial_trace(two, dims, k0).matrix(), expected), 1e-10);
  EXPECT_LT(frobenius_distance(partial_trace(two, dims, k1).matrix(), expected), 1e-10);

  // Explicit four-term sum with Pr(x1 x2) = pi T^(x1) T^(x2) 1.
  CMatrix direct = CMatrix::Zero(4, 4);
  const RVector pi = src.stationary().probs();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const double pr = (pi.transpose() * src.transition(a) * src.transition(b)).sum();
      direct += pr * Eigen::kroneckerProduct(src.output(a).matrix(), src.output(b).matrix()).eval();
    }
  EXPECT_LT(frobenius_distance(two.matrix(), direct), 1e-14);

  JointStateBuilder builder(src);
  builder.extend();
  builder.extend();
  EXPECT_LT(frobenius_distance(builder.joint_matrix(), direct), 1e-14);
  EXPECT_THROW(joint_state(src, 13), ValidationError);
}

TEST(ModelIo, AssetsLoadAndValidate) {
  const SourceDefinition pc = load_model(std::string(QPE_ASSET_DIR) + "/models/perturbed_coin.json");
  const SourceDefinition ref = perturbed_coin_definition(0.1, 0.1);
  for (int x = 0; x < 2; ++x) {
    EXPECT_LT((pc.transitions[x] - ref.transitions[x]).norm(), 1e-15);
    EXPECT_LT(frobenius_distance(pc.outputs[x], ref.outputs[x]), 1e-15);
  }
  const SourceDefinition gm = load_model(std::string(QPE_ASSET_DIR) + "/models/golden_mean_2_1.json");
  EXPECT_EQ(gm.states.size(), 3u);
}

TEST(ModelIo, RoundTrip) {
  const SourceDefinition def = perturbed_coin_definition(0.25, 0.3);
  const SourceDefinition back = parse_model(write_model(def));
  EXPECT_EQ(back.states, def.states);
  for (int x = 0; x < 2; ++x) {
    EXPECT_EQ(back.transitions[x], def.transitions[x]);
    EXPECT_EQ(back.outputs[x], def.outputs[x]);
  }
  EXPECT_EQ(back.hamiltonian, def.hamiltonian);
}

TEST(ModelIo, Diagnostics) {
  const std::string bad_syntax = "{\n  \"states\": [\"A\",\n  oops\n}";
  try {
    parse_model(bad_syntax);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }

  std::string text = write_model(perturbed_coin_definition(0.3, 0.5));
  const auto pos = text.find("\"outputs\"");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 9, "\"outputz\"");
  try {
    parse_model(text);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("/outputs"), std::string::npos) << e.what();
  }

  SourceDefinition def = perturbed_coin_definition(0.3, 0.5);
  def.transitions[1](0, 1) = 0.2;
  try {
    parse_model(write_model(def));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("row 0"), std::string::npos) << e.what();
  }
}
