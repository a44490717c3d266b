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

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qpe {

struct GraphOptions {
  double dedup_radius = 1e-9;      // L1
  double mass_threshold = 1e-12;   // children below this are merged into the nearest node
  std::size_t max_nodes = 10000;
  double edge_threshold = 1e-14;   // outcomes with smaller probability are not followed
  double symmetry_offset = 0.01;   // epsilon_0 for the first-step target
  /// For two-state sources whose root needed an offset, also expand from the
  /// stable fixed points of the return map so that slowly converging
  /// transients still reach an explicit recurrent class.
  bool seed_attractors = true;
};

struct GraphNode {
  BeliefState belief;
  DensityOperator target;       // protocol target used at this node
  bool offset_root = false;     // target built from the offset belief
  bool seeded = false;          // added as an attractor seed
  bool recurrent = false;
  int recurrent_class = -1;
  double mass_estimate = 0.0;
  /// Expected work per step at this node.
  ExtendedReal work;
};

struct GraphEdge {
  int from = 0;
  int to = 0;
  int outcome = 0;
  ExtendedReal work;
  double probability = 0.0;
  /// Child was merged into the nearest existing node (mass or node cap).
  bool quantized = false;
};

struct BeliefGraph {
  StrategyPolicy policy;
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  std::vector<std::vector<int>> closed_classes;
  int root = 0;
  bool closed = true;           // false when the node cap stopped expansion
  double dropped_mass = 0.0;    // mass merged by threshold truncation
  double ignored_edge_mass = 0.0;
  std::vector<std::string> truncation_log;

  std::size_t recurrent_node_count() const;
};

BeliefGraph enumerate_graph(const HmmSource& src, const StrategyPolicy& policy,
                            const GraphOptions& opts = {});

/// Stationary distribution over nodes (zero on transient nodes). Closed
/// classes are solved by sparse LU and weighted by absorption probability
/// from the root. Classes free of quantized edges take precedence over
/// classes that only exist because of truncation. Throws ComputationError
/// when no closed class exists.
std::vector<double> stationary_measure(const BeliefGraph& graph);
/// Same quantity by lazy power iteration; used as a cross-check.
std::vector<double> stationary_measure_power(const BeliefGraph& graph, double tolerance = 1e-14,
                                             int max_iterations = 2000000);

/// sum_nodes measure * node work.
ExtendedReal work_rate(const BeliefGraph& graph, const std::vector<double>& measure);

/// True when, for every outcome, the map restricted to recurrent nodes is a
/// bijection within each closed class.
bool recurrent_maps_are_permutations(const BeliefGraph& graph);

/// Adjacency dump for visualization.
std::string graph_to_json(const BeliefGraph& graph);

// Two-state scalar picture: eta = [1/2 + eps, 1/2 - eps].

BeliefState belief_from_epsilon(double eps);

struct BranchValue {
  double image = 0.0;
  double probability = 0.0;
  bool defined = false;  // false when the outcome is impossible at this eps
};

class ReturnMap {
 public:
  ReturnMap(HmmSource src, StrategyPolicy policy, std::vector<double> grid);

  const std::vector<double>& grid() const { return grid_; }
  int num_branches() const { return num_branches_; }
  /// image(b)[i], probability(b)[i] on the grid.
  const std::vector<double>& image(int branch) const { return images_[static_cast<std::size_t>(branch)]; }
  const std::vector<double>& probability(int branch) const { return probs_[static_cast<std::size_t>(branch)]; }
  const std::vector<char>& defined(int branch) const { return defined_[static_cast<std::size_t>(branch)]; }

  /// Branch b at an arbitrary eps. Branches are indexed by merged outcome
  /// (0 = largest eigenvalue).
  BranchValue evaluate(int branch, double eps) const;

  const HmmSource& source() const { return src_; }
  const StrategyPolicy& policy() const { return policy_; }

 private:
  HmmSource src_;
  StrategyPolicy policy_;
  std::vector<double> grid_;
  int num_branches_ = 0;
  std::vector<std::vector<double>> images_;
  std::vector<std::vector<double>> probs_;
  std::vector<std::vector<char>> defined_;
};

/// Throws ValidationError for non-two-state sources or the memoryless policy.
ReturnMap return_map(const HmmSource& src, const StrategyPolicy& policy, int grid_size = 401);

struct FixedPoint {
  double epsilon = 0.0;
  int branch = 0;
  double slope = 0.0;
  bool stable = false;
};

/// Branch/identity intersections, bisected to 1e-10.
std::vector<FixedPoint> fixed_points(const ReturnMap& map);

/// Central-difference slope of a branch.
double branch_slope(const ReturnMap& map, int branch, double eps, double h = 1e-7);

/// Largest spectral radius over outcomes of the finite-difference Jacobian
/// of the belief update at eta (tangent to the simplex).
double update_spectral_radius(const HmmSource& src, const StrategyPolicy& policy,
                              const BeliefState& eta, double h = 1e-7);

/// Top Lyapunov exponent of the linearised update at eta, branches drawn
/// with their probabilities there. For one tangent dimension this is
/// sum_o Pr(o) ln|J_o|; otherwise a fixed-seed random product. -inf when no
/// branch is differentiable.
double update_lyapunov_exponent(const HmmSource& src, const StrategyPolicy& policy,
                                const BeliefState& eta, double h = 1e-7,
                                int samples = 4000);

/// Stable fixed points of every branch and of every branch's second
/// iterate (two-cycles such as the swap map).
std::vector<double> attractor_points(const ReturnMap& map);

/// Whether the first step should use the offset target: the belief is a
/// fixed point of every work branch and is unstable.
bool needs_symmetry_breaking(const HmmSource& src, const StrategyPolicy& policy,
                             const BeliefState& eta);
/// (1 - 2 offset) eta + 2 offset e_k; [1/2 + offset, 1/2 - offset] at pi
/// for two states and k = 0.
BeliefState offset_belief(const BeliefState& eta, double offset, int toward = 0);
/// Offset toward the first latent state whose point belief changes the
/// expected output state; for the golden mean e_0 leaves xi unchanged.
BeliefState offset_belief(const HmmSource& src, const BeliefState& eta, double offset);

enum class Regime { apathetic, advantageous };
std::string to_string(Regime regime);

/// Sign of the memory-quantum Lyapunov exponent at the stationary belief.
Regime classify_regime(const HmmSource& src, double temperature = 1.0);

/// p at which the Lyapunov exponent changes sign within [lo, hi], bisected to
/// `tolerance`; nullopt when it does not change sign.
std::optional<double> phase_boundary(const std::function<HmmSource(double)>& family,
                                     const StrategyPolicy& policy, double lo, double hi,
                                     double tolerance = 1e-8);

}  // namespace qpe
