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

#include "qpe/metadynamics.hpp"

#include "qpe/errors.hpp"
#include "node_step.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <sstream>

namespace qpe {

std::size_t BeliefGraph::recurrent_node_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const GraphNode& n) { return n.recurrent; }));
}

namespace {

class NodeIndex {
 public:
  explicit NodeIndex(double radius) : radius_(radius) {}

  int find(const std::vector<GraphNode>& nodes, const BeliefState& b) const {
    const double key = b[0];
    for (auto it = by_first_.lower_bound(key - radius_);
         it != by_first_.end() && it->first <= key + radius_; ++it) {
      if (l1_distance(nodes[static_cast<std::size_t>(it->second)].belief, b) <= radius_) {
        return it->second;
      }
    }
    return -1;
  }

  void insert(const BeliefState& b, int id) { by_first_.emplace(b[0], id); }

 private:
  double radius_;
  std::multimap<double, int> by_first_;
};

int nearest_node(const std::vector<GraphNode>& nodes, const BeliefState& b) {
  int best = 0;
  double best_d = l1_distance(nodes[0].belief, b);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double d = l1_distance(nodes[i].belief, b);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

ExtendedReal node_work(const StrategyPolicy& policy, bool offset, const IdealProtocol& protocol,
                       const DensityOperator& xi, const DensityOperator& gamma) {
  if (policy.kind == StrategyKind::overcommit || offset) return expected_work(protocol, xi);
  return rel_entropy(protocol.target(), gamma);
}

// Tarjan SCC on the adjacency lists; returns component ids.
std::vector<int> strongly_connected(const std::vector<std::vector<int>>& adj, int& count) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<int> stack;
  int counter = 0;
  count = 0;
  // Iterative to survive long chains.
  struct Frame {
    int v;
    std::size_t next;
  };
  for (int root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    std::vector<Frame> frames{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!frames.empty()) {
      Frame& f = frames.back();
      const int v = f.v;
      if (f.next < adj[v].size()) {
        const int w = adj[v][f.next++];
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        int w = -1;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = count;
        } while (w != v);
        ++count;
      }
      frames.pop_back();
      if (!frames.empty()) {
        const int parent = frames.back().v;
        low[parent] = std::min(low[parent], low[v]);
      }
    }
  }
  return comp;
}

void classify(BeliefGraph& g) {
  const int n = static_cast<int>(g.nodes.size());
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const GraphEdge& e : g.edges) adj[static_cast<std::size_t>(e.from)].push_back(e.to);
  int count = 0;
  const std::vector<int> comp = strongly_connected(adj, count);
  std::vector<char> has_exit(static_cast<std::size_t>(count), 0);
  for (const GraphEdge& e : g.edges) {
    if (comp[static_cast<std::size_t>(e.from)] != comp[static_cast<std::size_t>(e.to)]) {
      has_exit[static_cast<std::size_t>(comp[static_cast<std::size_t>(e.from)])] = 1;
    }
  }
  std::vector<int> class_of(static_cast<std::size_t>(count), -1);
  // Order closed classes by their smallest node id for determinism.
  for (int v = 0; v < n; ++v) {
    const int c = comp[static_cast<std::size_t>(v)];
    if (has_exit[static_cast<std::size_t>(c)]) continue;
    if (class_of[static_cast<std::size_t>(c)] < 0) {
      class_of[static_cast<std::size_t>(c)] = static_cast<int>(g.closed_classes.size());
      g.closed_classes.emplace_back();
    }
    const int k = class_of[static_cast<std::size_t>(c)];
    g.closed_classes[static_cast<std::size_t>(k)].push_back(v);
    g.nodes[static_cast<std::size_t>(v)].recurrent = true;
    g.nodes[static_cast<std::size_t>(v)].recurrent_class = k;
  }
}

}  // namespace

BeliefGraph enumerate_graph(const HmmSource& src, const StrategyPolicy& policy,
                            const GraphOptions& opts) {
  BeliefGraph g;
  g.policy = policy;
  const DensityOperator gamma = gibbs_state(src.hamiltonian(), policy.temperature);
  NodeIndex index(opts.dedup_radius);
  std::deque<int> queue;

  auto add_node = [&](const BeliefState& b, bool offset, bool seeded, double mass) {
    GraphNode node{b, DensityOperator::maximally_mixed(src.dim()), offset, seeded,
                   false, -1, mass, ExtendedReal::finite(0.0)};
    g.nodes.push_back(std::move(node));
    const int id = static_cast<int>(g.nodes.size()) - 1;
    index.insert(b, id);
    queue.push_back(id);
    return id;
  };

  const BeliefState& root = src.initial_belief();
  const bool offset = opts.symmetry_offset > 0.0 && needs_symmetry_breaking(src, policy, root);
  g.root = add_node(root, offset, false, 1.0);
  if (offset) {
    std::ostringstream os;
    os << "initial belief is an unstable fixed point; first target uses offset "
       << opts.symmetry_offset;
    g.truncation_log.push_back(os.str());
  }
  if (offset && opts.seed_attractors && src.num_states() == 2) {
    const ReturnMap map = return_map(src, policy, 401);
    for (const double eps : attractor_points(map)) {
      const BeliefState b = belief_from_epsilon(eps);
      if (index.find(g.nodes, b) < 0) add_node(b, false, true, 1.0);
    }
  }

  std::size_t merged_children = 0;
  std::size_t capped_children = 0;
  double capped_mass = 0.0;
  while (!queue.empty()) {
    const int id = queue.front();
    queue.pop_front();
    const BeliefState eta = g.nodes[static_cast<std::size_t>(id)].belief;
    const bool is_offset = g.nodes[static_cast<std::size_t>(id)].offset_root;
    const BeliefState target_belief = is_offset ? offset_belief(src, eta, opts.symmetry_offset) : eta;
    const detail::NodeStep step = detail::node_step(src, policy, eta, target_belief);
    const DensityOperator xi = expected_state(eta, src);
    {
      GraphNode& node = g.nodes[static_cast<std::size_t>(id)];
      node.target = step.protocol.target();
      node.work = node_work(policy, is_offset, step.protocol, xi, gamma);
    }
    const double mass = g.nodes[static_cast<std::size_t>(id)].mass_estimate;
    for (const WorkProbability& wp : step.probabilities) {
      if (wp.probability <= opts.edge_threshold) {
        g.ignored_edge_mass = std::max(g.ignored_edge_mass, wp.probability);
        continue;
      }
      const BeliefState child = detail::branch_update(step, eta, wp.outcome, src, policy);
      const double child_mass = mass * wp.probability;
      int to = index.find(g.nodes, child);
      bool quantized = false;
      if (to < 0) {
        if (g.nodes.size() >= opts.max_nodes) {
          to = nearest_node(g.nodes, child);
          quantized = true;
          g.closed = false;
          ++capped_children;
          capped_mass += child_mass;
        } else if (child_mass < opts.mass_threshold) {
          to = nearest_node(g.nodes, child);
          quantized = true;
          ++merged_children;
          g.dropped_mass += child_mass;
        } else {
          to = add_node(child, false, false, 0.0);
        }
      }
      if (!quantized && to != id) g.nodes[static_cast<std::size_t>(to)].mass_estimate += child_mass;
      g.edges.push_back({id, to, wp.outcome, wp.value, wp.probability, quantized});
    }
  }
  if (merged_children > 0) {
    std::ostringstream os;
    os << "merged " << merged_children << " low-mass children into nearest nodes (mass "
       << g.dropped_mass << ")";
    g.truncation_log.push_back(os.str());
  }
  if (capped_children > 0) {
    std::ostringstream os;
    os << "node cap " << opts.max_nodes << " reached; " << capped_children
       << " children merged into nearest nodes (mass estimate " << capped_mass << ")";
    g.truncation_log.push_back(os.str());
  }
  classify(g);
  return g;
}

namespace {

// Rows of the class transition matrix in local indices.
Eigen::SparseMatrix<double> class_matrix(const BeliefGraph& g, const std::vector<int>& cls,
                                         std::vector<int>& local) {
  local.assign(g.nodes.size(), -1);
  for (std::size_t i = 0; i < cls.size(); ++i) local[static_cast<std::size_t>(cls[i])] = static_cast<int>(i);
  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> row_sum(cls.size(), 0.0);
  for (const GraphEdge& e : g.edges) {
    const int a = local[static_cast<std::size_t>(e.from)];
    const int b = local[static_cast<std::size_t>(e.to)];
    if (a < 0 || b < 0) continue;
    trips.emplace_back(a, b, e.probability);
    row_sum[static_cast<std::size_t>(a)] += e.probability;
  }
  // Ignored (negligible) outcomes make rows sum slightly below one.
  for (auto& t : trips) {
    t = Eigen::Triplet<double>(t.row(), t.col(), t.value() / row_sum[static_cast<std::size_t>(t.row())]);
  }
  const auto m = static_cast<Eigen::Index>(cls.size());
  Eigen::SparseMatrix<double> p(m, m);
  p.setFromTriplets(trips.begin(), trips.end());
  return p;
}

std::vector<double> solve_class_lu(const BeliefGraph& g, const std::vector<int>& cls) {
  if (cls.size() == 1) return {1.0};
  std::vector<int> local;
  const Eigen::SparseMatrix<double> p = class_matrix(g, cls, local);
  const Eigen::Index m = p.rows();
  // A = P^T - I with the last row replaced by ones.
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < p.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(p, k); it; ++it) {
      if (it.col() == m - 1) continue;
      trips.emplace_back(it.col(), it.row(), it.value());
    }
  }
  for (Eigen::Index i = 0; i < m - 1; ++i) trips.emplace_back(i, i, -1.0);
  for (Eigen::Index j = 0; j < m; ++j) trips.emplace_back(m - 1, j, 1.0);
  Eigen::SparseMatrix<double> a(m, m);
  a.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw ComputationError("stationary solve: factorization failed");
  RVector rhs = RVector::Zero(m);
  rhs(m - 1) = 1.0;
  RVector pi = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw ComputationError("stationary solve failed");
  std::vector<double> out(static_cast<std::size_t>(m));
  double sum = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    out[static_cast<std::size_t>(i)] = std::max(0.0, pi(i));
    sum += out[static_cast<std::size_t>(i)];
  }
  for (double& v : out) v /= sum;
  return out;
}

std::vector<double> solve_class_power(const BeliefGraph& g, const std::vector<int>& cls,
                                      double tolerance, int max_iterations) {
  if (cls.size() == 1) return {1.0};
  std::vector<int> local;
  const Eigen::SparseMatrix<double> p = class_matrix(g, cls, local);
  const Eigen::SparseMatrix<double> pt = p.transpose();
  const Eigen::Index m = p.rows();
  RVector v = RVector::Constant(m, 1.0 / static_cast<double>(m));
  for (int it = 0; it < max_iterations; ++it) {
    RVector next = 0.5 * (v + pt * v);
    next /= next.sum();
    const double change = (next - v).lpNorm<1>();
    v = std::move(next);
    if (change < tolerance) break;
  }
  return std::vector<double>(v.data(), v.data() + m);
}

// Probability of ending in each closed class when started at the root.
std::vector<double> absorption_weights(const BeliefGraph& g) {
  const std::size_t nc = g.closed_classes.size();
  const GraphNode& root = g.nodes[static_cast<std::size_t>(g.root)];
  std::vector<double> w(nc, 0.0);
  if (root.recurrent) {
    w[static_cast<std::size_t>(root.recurrent_class)] = 1.0;
    return w;
  }
  std::vector<int> local(g.nodes.size(), -1);
  int nt = 0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (!g.nodes[i].recurrent) local[i] = nt++;
  }
  std::vector<double> row_sum(g.nodes.size(), 0.0);
  for (const GraphEdge& e : g.edges) row_sum[static_cast<std::size_t>(e.from)] += e.probability;
  std::vector<Eigen::Triplet<double>> trips;
  RMatrix rhs = RMatrix::Zero(nt, static_cast<Eigen::Index>(nc));
  for (int i = 0; i < nt; ++i) trips.emplace_back(i, i, 1.0);
  for (const GraphEdge& e : g.edges) {
    const int a = local[static_cast<std::size_t>(e.from)];
    if (a < 0) continue;
    const double pr = e.probability / row_sum[static_cast<std::size_t>(e.from)];
    const GraphNode& to = g.nodes[static_cast<std::size_t>(e.to)];
    if (to.recurrent) {
      rhs(a, to.recurrent_class) += pr;
    } else {
      trips.emplace_back(a, local[static_cast<std::size_t>(e.to)], -pr);
    }
  }
  Eigen::SparseMatrix<double> a(nt, nt);
  a.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw ComputationError("absorption solve failed");
  const RMatrix h = lu.solve(rhs);
  const int r = local[static_cast<std::size_t>(g.root)];
  for (std::size_t c = 0; c < nc; ++c) w[c] = std::max(0.0, h(r, static_cast<Eigen::Index>(c)));
  return w;
}

template <typename Solver>
std::vector<double> combine_classes(const BeliefGraph& g, Solver solve) {
  if (g.closed_classes.empty()) {
    throw ComputationError(
        "belief graph has no closed recurrent class; increase max_nodes or lower mass_threshold");
  }
  std::vector<double> weights = absorption_weights(g);
  // Classes held together only by quantized edges are truncation artifacts
  // whenever an exact class exists.
  std::vector<char> exact(g.closed_classes.size(), 1);
  for (const GraphEdge& e : g.edges) {
    const GraphNode& from = g.nodes[static_cast<std::size_t>(e.from)];
    if (e.quantized && from.recurrent) exact[static_cast<std::size_t>(from.recurrent_class)] = 0;
  }
  const bool any_exact = std::find(exact.begin(), exact.end(), 1) != exact.end();
  const bool any_inexact = std::find(exact.begin(), exact.end(), 0) != exact.end();
  if (any_exact && any_inexact) {
    for (std::size_t c = 0; c < weights.size(); ++c) {
      if (!exact[c]) weights[c] = 0.0;
    }
  }
  double total = 0.0;
  for (const double w : weights) total += w;
  if (!(total > 1e-12)) {
    // The root does not drain into a preferred class within the graph.
    int eligible = 0;
    for (std::size_t c = 0; c < weights.size(); ++c) {
      if (!any_inexact || !any_exact || exact[c]) ++eligible;
    }
    for (std::size_t c = 0; c < weights.size(); ++c) {
      weights[c] = (!any_inexact || !any_exact || exact[c]) ? 1.0 / eligible : 0.0;
    }
    total = 1.0;
  }
  std::vector<double> measure(g.nodes.size(), 0.0);
  for (std::size_t c = 0; c < g.closed_classes.size(); ++c) {
    if (weights[c] <= 0.0) continue;
    const std::vector<double> local = solve(g.closed_classes[c]);
    for (std::size_t i = 0; i < local.size(); ++i) {
      measure[static_cast<std::size_t>(g.closed_classes[c][i])] += weights[c] / total * local[i];
    }
  }
  return measure;
}

}  // namespace

std::vector<double> stationary_measure(const BeliefGraph& graph) {
  return combine_classes(graph, [&graph](const std::vector<int>& cls) {
    return solve_class_lu(graph, cls);
  });
}

std::vector<double> stationary_measure_power(const BeliefGraph& graph, double tolerance,
                                             int max_iterations) {
  return combine_classes(graph, [&](const std::vector<int>& cls) {
    return solve_class_power(graph, cls, tolerance, max_iterations);
  });
}

ExtendedReal work_rate(const BeliefGraph& graph, const std::vector<double>& measure) {
  if (measure.size() != graph.nodes.size()) {
    throw ValidationError("measure size differs from node count");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < measure.size(); ++i) {
    if (measure[i] <= 0.0) continue;
    const ExtendedReal& w = graph.nodes[i].work;
    if (!w.is_finite()) return w;
    acc += measure[i] * w.value();
  }
  return ExtendedReal::finite(acc);
}

bool recurrent_maps_are_permutations(const BeliefGraph& graph) {
  for (const std::vector<int>& cls : graph.closed_classes) {
    std::map<int, std::vector<std::pair<int, int>>> by_outcome;  // outcome -> (from, to)
    for (const GraphEdge& e : graph.edges) {
      const GraphNode& from = graph.nodes[static_cast<std::size_t>(e.from)];
      if (!from.recurrent || from.recurrent_class != graph.nodes[static_cast<std::size_t>(cls.front())].recurrent_class) {
        continue;
      }
      by_outcome[e.outcome].emplace_back(e.from, e.to);
    }
    for (const auto& [outcome, pairs] : by_outcome) {
      (void)outcome;
      if (pairs.size() != cls.size()) return false;
      std::vector<int> froms;
      std::vector<int> tos;
      for (const auto& [a, b] : pairs) {
        froms.push_back(a);
        tos.push_back(b);
      }
      std::sort(froms.begin(), froms.end());
      std::sort(tos.begin(), tos.end());
      if (std::adjacent_find(froms.begin(), froms.end()) != froms.end()) return false;
      if (std::adjacent_find(tos.begin(), tos.end()) != tos.end()) return false;
    }
  }
  return true;
}

}  // namespace qpe
