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
#include "qpe/metadynamics.hpp"
#include "node_step.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace qpe {

namespace {

constexpr double kRootTolerance = 1e-10;
constexpr double kDiscontinuityGap = 1e-8;

void require_two_state(const HmmSource& src, const StrategyPolicy& policy) {
  if (src.num_states() != 2) {
    throw ValidationError("return maps need a two-state source, got " +
                          std::to_string(src.num_states()) + " states");
  }
  if (policy.kind == StrategyKind::memoryless) {
    throw ValidationError("the memoryless policy never updates its belief; no return map");
  }
}

}  // namespace

BeliefState belief_from_epsilon(double eps) {
  const double e = std::clamp(eps, -0.5, 0.5);
  RVector v(2);
  v << 0.5 + e, 0.5 - e;
  return BeliefState(v);
}

ReturnMap::ReturnMap(HmmSource src, StrategyPolicy policy, std::vector<double> grid)
    : src_(std::move(src)), policy_(policy), grid_(std::move(grid)) {
  require_two_state(src_, policy_);
  std::vector<std::vector<BranchValue>> per_point;
  per_point.reserve(grid_.size());
  for (const double eps : grid_) {
    std::vector<BranchValue> values;
    const BeliefState eta = belief_from_epsilon(eps);
    const detail::NodeStep step = detail::node_step(src_, policy_, eta);
    for (const WorkProbability& wp : step.probabilities) {
      BranchValue v;
      v.probability = wp.probability;
      if (wp.probability > kImpossibleTolerance) {
        v.image = detail::branch_update(step, eta, wp.outcome, src_, policy_)[0] - 0.5;
        v.defined = true;
      }
      values.push_back(v);
    }
    num_branches_ = std::max(num_branches_, static_cast<int>(values.size()));
    per_point.push_back(std::move(values));
  }
  const auto nb = static_cast<std::size_t>(num_branches_);
  images_.assign(nb, std::vector<double>(grid_.size(), 0.0));
  probs_.assign(nb, std::vector<double>(grid_.size(), 0.0));
  defined_.assign(nb, std::vector<char>(grid_.size(), 0));
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    for (std::size_t b = 0; b < per_point[i].size(); ++b) {
      images_[b][i] = per_point[i][b].image;
      probs_[b][i] = per_point[i][b].probability;
      defined_[b][i] = per_point[i][b].defined ? 1 : 0;
    }
  }
}

BranchValue ReturnMap::evaluate(int branch, double eps) const {
  BranchValue v;
  if (!(eps >= -0.5 && eps <= 0.5)) return v;
  const BeliefState eta = belief_from_epsilon(eps);
  const detail::NodeStep step = detail::node_step(src_, policy_, eta);
  if (branch < 0 || branch >= static_cast<int>(step.probabilities.size())) return v;
  v.probability = step.probabilities[static_cast<std::size_t>(branch)].probability;
  if (v.probability > kImpossibleTolerance) {
    v.image = detail::branch_update(step, eta, branch, src_, policy_)[0] - 0.5;
    v.defined = true;
  }
  return v;
}

ReturnMap return_map(const HmmSource& src, const StrategyPolicy& policy, int grid_size) {
  if (grid_size < 3) throw ValidationError("return map grid needs at least 3 points");
  std::vector<double> grid(static_cast<std::size_t>(grid_size));
  for (int i = 0; i < grid_size; ++i) {
    grid[static_cast<std::size_t>(i)] = -0.5 + static_cast<double>(i) / (grid_size - 1);
  }
  return ReturnMap(src, policy, std::move(grid));
}

double branch_slope(const ReturnMap& map, int branch, double eps, double h) {
  const double lo = std::max(-0.5, eps - h);
  const double hi = std::min(0.5, eps + h);
  const BranchValue a = map.evaluate(branch, lo);
  const BranchValue b = map.evaluate(branch, hi);
  if (!a.defined || !b.defined) return std::numeric_limits<double>::quiet_NaN();
  return (b.image - a.image) / (hi - lo);
}

namespace {

// Roots of g on [-1/2, 1/2] by sign-change bisection over the scan points.
// Exact zeros on the scan grid get log-spaced neighbours so that roots
// close to them are not masked.
template <typename G>
std::vector<double> scalar_roots(const std::vector<double>& base_grid, G g) {
  std::vector<double> pts = base_grid;
  std::vector<double> extra;
  for (const double x : base_grid) {
    const auto v = g(x);
    if (v && std::abs(*v) < 1e-14) {
      for (int k = 2; k <= 9; ++k) {
        const double d = std::pow(10.0, -k);
        extra.push_back(x - d);
        extra.push_back(x + d);
      }
    }
  }
  for (const double x : extra) {
    if (x >= -0.5 && x <= 0.5) pts.push_back(x);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  std::vector<double> roots;
  auto add_root = [&roots](double x) {
    for (const double r : roots) {
      if (std::abs(r - x) < 1e-9) return;
    }
    roots.push_back(x);
  };
  std::vector<std::optional<double>> vals;
  vals.reserve(pts.size());
  for (const double x : pts) vals.push_back(g(x));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (vals[i] && std::abs(*vals[i]) < 1e-14) add_root(pts[i]);
    if (i + 1 == pts.size() || !vals[i] || !vals[i + 1]) continue;
    double a = pts[i];
    double b = pts[i + 1];
    double ga = *vals[i];
    const double gb = *vals[i + 1];
    if (std::abs(ga) < 1e-14 || std::abs(gb) < 1e-14 || (ga > 0) == (gb > 0)) continue;
    bool ok = true;
    while (b - a > kRootTolerance) {
      const double m = 0.5 * (a + b);
      const auto gm = g(m);
      if (!gm) {
        ok = false;
        break;
      }
      if (*gm == 0.0) {
        a = b = m;
        break;
      }
      if ((*gm > 0) == (ga > 0)) {
        a = m;
        ga = *gm;
      } else {
        b = m;
      }
    }
    if (!ok) continue;
    const double root = 0.5 * (a + b);
    const auto gr = g(root);
    if (gr && std::abs(*gr) <= kDiscontinuityGap) add_root(root);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace

std::vector<FixedPoint> fixed_points(const ReturnMap& map) {
  std::vector<FixedPoint> out;
  for (int b = 0; b < map.num_branches(); ++b) {
    auto g = [&map, b](double eps) -> std::optional<double> {
      const BranchValue v = map.evaluate(b, eps);
      if (!v.defined) return std::nullopt;
      return v.image - eps;
    };
    for (const double root : scalar_roots(map.grid(), g)) {
      FixedPoint fp;
      fp.epsilon = root;
      fp.branch = b;
      fp.slope = branch_slope(map, b, root);
      fp.stable = std::abs(fp.slope) < 1.0;
      out.push_back(fp);
    }
  }
  return out;
}

std::vector<double> attractor_points(const ReturnMap& map) {
  std::vector<double> out;
  auto add = [&out](double x) {
    for (const double y : out) {
      if (std::abs(x - y) < 1e-9) return;
    }
    out.push_back(x);
  };
  for (const FixedPoint& fp : fixed_points(map)) {
    if (fp.stable) add(fp.epsilon);
  }
  for (int b = 0; b < map.num_branches(); ++b) {
    auto twice = [&map, b](double eps) -> std::optional<double> {
      const BranchValue v = map.evaluate(b, eps);
      if (!v.defined) return std::nullopt;
      const BranchValue w = map.evaluate(b, v.image);
      if (!w.defined) return std::nullopt;
      return w.image - eps;
    };
    for (const double root : scalar_roots(map.grid(), twice)) {
      const double h = 1e-7;
      const auto lo = twice(std::max(-0.5, root - h));
      const auto hi = twice(std::min(0.5, root + h));
      if (!lo || !hi) continue;
      const double slope = 1.0 + (*hi - *lo) / (std::min(0.5, root + h) - std::max(-0.5, root - h));
      if (std::abs(slope) < 1.0) add(root);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

struct BranchJacobian {
  double probability = 0.0;
  RMatrix jac;
};

// Central-difference Jacobians of each possible branch, in the simplex
// coordinates (eta_0 - eta_{n-1}, ..., eta_{n-2} - eta_{n-1}).
std::vector<BranchJacobian> branch_jacobians(const HmmSource& src, const StrategyPolicy& policy,
                                             const BeliefState& eta, double h) {
  std::vector<BranchJacobian> out;
  const int n = src.num_states();
  if (policy.kind == StrategyKind::memoryless || n < 2) return out;
  if (eta.probs().minCoeff() <= h) return out;
  const detail::NodeStep base = detail::node_step(src, policy, eta);
  for (const WorkProbability& wp : base.probabilities) {
    if (wp.probability <= kImpossibleTolerance) continue;
    RMatrix jac(n - 1, n - 1);
    bool ok = true;
    for (int j = 0; j < n - 1 && ok; ++j) {
      RVector dir = RVector::Zero(n);
      dir(j) = 1.0;
      dir(n - 1) = -1.0;
      RVector images[2];
      for (int side = 0; side < 2 && ok; ++side) {
        const BeliefState shifted(eta.probs() + (side == 0 ? h : -h) * dir);
        const detail::NodeStep step = detail::node_step(src, policy, shifted);
        if (wp.outcome >= static_cast<int>(step.probabilities.size()) ||
            step.probabilities[static_cast<std::size_t>(wp.outcome)].probability <=
                kImpossibleTolerance) {
          ok = false;
          break;
        }
        images[side] = detail::branch_update(step, shifted, wp.outcome, src, policy).probs();
      }
      if (!ok) break;
      jac.col(j) = (images[0] - images[1]).head(n - 1) / (2.0 * h);
    }
    if (ok) out.push_back({wp.probability, std::move(jac)});
  }
  return out;
}

constexpr double kLyapunovMargin = 1e-9;

}  // namespace

double update_spectral_radius(const HmmSource& src, const StrategyPolicy& policy,
                              const BeliefState& eta, double h) {
  double radius = 0.0;
  for (const BranchJacobian& b : branch_jacobians(src, policy, eta, h)) {
    const Eigen::EigenSolver<RMatrix> solver(b.jac, false);
    radius = std::max(radius, solver.eigenvalues().cwiseAbs().maxCoeff());
  }
  return radius;
}

double update_lyapunov_exponent(const HmmSource& src, const StrategyPolicy& policy,
                                const BeliefState& eta, double h, int samples) {
  const std::vector<BranchJacobian> branches = branch_jacobians(src, policy, eta, h);
  if (branches.empty()) return -std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (const auto& b : branches) total += b.probability;
  if (branches.front().jac.rows() == 1) {
    double acc = 0.0;
    for (const auto& b : branches) {
      const double a = std::abs(b.jac(0, 0));
      if (a == 0.0) return -std::numeric_limits<double>::infinity();
      acc += b.probability / total * std::log(a);
    }
    return acc;
  }
  // Random product along branches drawn with their probabilities at eta;
  // fixed seed so the classification is reproducible.
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unif(0.0, total);
  const auto dim = branches.front().jac.rows();
  RVector v = RVector::Ones(dim) / std::sqrt(static_cast<double>(dim));
  double acc = 0.0;
  const int burn = samples / 10;
  for (int i = 0; i < samples + burn; ++i) {
    double u = unif(rng);
    std::size_t k = 0;
    while (k + 1 < branches.size() && u >= branches[k].probability) u -= branches[k++].probability;
    v = branches[k].jac * v;
    const double norm = v.norm();
    if (norm == 0.0) return -std::numeric_limits<double>::infinity();
    v /= norm;
    if (i >= burn) acc += std::log(norm);
  }
  return acc / samples;
}

bool needs_symmetry_breaking(const HmmSource& src, const StrategyPolicy& policy,
                             const BeliefState& eta) {
  if (policy.kind == StrategyKind::memoryless) return false;
  const detail::NodeStep step = detail::node_step(src, policy, eta);
  for (const WorkProbability& wp : step.probabilities) {
    if (wp.probability <= kImpossibleTolerance) continue;
    const BeliefState child = detail::branch_update(step, eta, wp.outcome, src, policy);
    if (l1_distance(child, eta) > 1e-9) return false;
  }
  return update_lyapunov_exponent(src, policy, eta) > kLyapunovMargin;
}

BeliefState offset_belief(const BeliefState& eta, double offset, int toward) {
  if (!(offset >= 0.0 && offset <= 0.5)) throw ValidationError("offset must lie in [0, 1/2]");
  if (toward < 0 || toward >= eta.size()) throw ValidationError("offset state out of range");
  RVector v = (1.0 - 2.0 * offset) * eta.probs();
  v(toward) += 2.0 * offset;
  return BeliefState(v);
}

BeliefState offset_belief(const HmmSource& src, const BeliefState& eta, double offset) {
  const CMatrix here = expected_state(eta, src).matrix();
  for (int k = 0; k < src.num_states(); ++k) {
    const BeliefState e = BeliefState::point(src.num_states(), k);
    if ((expected_state(e, src).matrix() - here).norm() > 1e-12) {
      return offset_belief(eta, offset, k);
    }
  }
  return offset_belief(eta, offset, 0);
}

std::string to_string(Regime regime) {
  return regime == Regime::apathetic ? "apathetic" : "advantage";
}

Regime classify_regime(const HmmSource& src, double temperature) {
  StrategyPolicy policy;
  policy.kind = StrategyKind::memory_quantum;
  policy.temperature = temperature;
  return update_lyapunov_exponent(src, policy, src.stationary()) > kLyapunovMargin
             ? Regime::advantageous
             : Regime::apathetic;
}

std::optional<double> phase_boundary(const std::function<HmmSource(double)>& family,
                                     const StrategyPolicy& policy, double lo, double hi,
                                     double tolerance) {
  if (!(lo < hi)) throw ValidationError("phase_boundary bracket must satisfy lo < hi");
  auto g = [&](double p) {
    const HmmSource src = family(p);
    return update_lyapunov_exponent(src, policy, src.stationary());
  };
  double glo = g(lo);
  const double ghi = g(hi);
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  if ((glo > 0) == (ghi > 0)) return std::nullopt;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if ((gm > 0) == (glo > 0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace qpe
