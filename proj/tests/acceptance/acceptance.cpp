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

// Acceptance checks 1-9. Oracles are closed-form 2x2 computations written
// here, not calls into the library under test. Prints one PASS/FAIL line per
// criterion and exits non-zero if any fails.

#include "qpe/bounds.hpp"
#include "qpe/metadynamics.hpp"
#include "qpe/protocol_sim.hpp"
#include "qpe_cli/cli.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace qpe;
using cd = std::complex<double>;

// ---------------------------------------------------------------- oracles

struct Eig2 {
  double lo = 0.0, hi = 0.0;       // ascending
  Eigen::Vector2cd v_lo, v_hi;
};

// Closed-form spectrum of a 2x2 Hermitian matrix.
Eig2 eig2(const CMatrix& m) {
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const cd b = m(0, 1);
  const double mid = 0.5 * (a + d);
  const double s = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(b));
  Eig2 e;
  e.lo = mid - s;
  e.hi = mid + s;
  if (std::abs(b) < 1e-300) {
    e.v_hi = a >= d ? Eigen::Vector2cd(1, 0) : Eigen::Vector2cd(0, 1);
    e.v_lo = a >= d ? Eigen::Vector2cd(0, 1) : Eigen::Vector2cd(1, 0);
  } else {
    e.v_hi = Eigen::Vector2cd(b, e.hi - a).normalized();
    e.v_lo = Eigen::Vector2cd(b, e.lo - a).normalized();
  }
  return e;
}

double expect(const Eigen::Vector2cd& v, const CMatrix& m) { return (v.adjoint() * m * v)(0, 0).real(); }

// ln Z and Gibbs state for H = diag(0, gap), T = 1.
double log_z(double gap) { return std::log(1.0 + std::exp(-gap)); }

// D[rho || gamma] for a qubit with H = diag(0, gap), T = 1.
double rel_entropy_gibbs(const CMatrix& rho, double gap) {
  const Eig2 e = eig2(rho);
  double neg_s = 0.0;
  for (const double l : {e.lo, e.hi}) {
    if (l > 0.0) neg_s += l * std::log(l);
  }
  return neg_s + gap * rho(1, 1).real() + log_z(gap);
}

// Perturbed coin expected state at eta = [1/2 + eps, 1/2 - eps].
CMatrix coin_xi(double p, double r, double eps) {
  const double pr0 = 0.5 + eps * (1.0 - 2.0 * p);
  const double a = std::sqrt(r);
  const double b = std::sqrt(1.0 - r);
  CMatrix m(2, 2);
  m << pr0 + (1 - pr0) * a * a, (1 - pr0) * a * b, (1 - pr0) * a * b, (1 - pr0) * b * b;
  return m;
}

CMatrix to_matrix(const HermitianOperator& op) { return op.matrix(); }

// Centered coefficient of determination for deficit = c / N.
double r_squared_inverse_n(const std::vector<double>& n, const std::vector<double>& d) {
  double sxy = 0.0, sxx = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    sxy += d[i] / n[i];
    sxx += 1.0 / (n[i] * n[i]);
    mean += d[i];
  }
  mean /= static_cast<double>(d.size());
  const double c = sxy / sxx;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    ss_res += (d[i] - c / n[i]) * (d[i] - c / n[i]);
    ss_tot += (d[i] - mean) * (d[i] - mean);
  }
  return 1.0 - ss_res / ss_tot;
}

StrategyPolicy policy_of(StrategyKind k, int overcommit_n = 200) {
  StrategyPolicy p;
  p.kind = k;
  p.overcommit_n = overcommit_n;
  return p;
}

double analytic_rate(const HmmSource& src, const StrategyPolicy& pol) {
  const BeliefGraph g = enumerate_graph(src, pol);
  return work_rate(g, stationary_measure(g)).to_double();
}

int hardware_jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// --------------------------------------------------------------- criteria

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double gap = 1.0;
  const double e[] = {0.0, gap};
  const HermitianOperator h = HermitianOperator::diagonal(e);
  const double bin = 0.01;
  const std::int64_t m = 100000;
  const double free_energy = -log_z(gap);

  auto bloch = [&](double rmin, double rmax) {
    const double z = 2 * u(rng) - 1;
    const double phi = 2 * M_PI * u(rng);
    const double rad = rmin + (rmax - rmin) * u(rng);
    const double s = std::sqrt(1 - z * z);
    CMatrix mat(2, 2);
    mat << 0.5 * (1 + rad * z), 0.5 * rad * s * cd(std::cos(phi), -std::sin(phi)),
        0.5 * rad * s * cd(std::cos(phi), std::sin(phi)), 0.5 * (1 - rad * z);
    return mat;
  };

  int pairs = 0, redrawn = 0, bad = 0;
  double worst_loc = 0.0, worst_sigma = 0.0;
  while (pairs < 20) {
    const CMatrix rho = bloch(0.1, 0.9);
    const CMatrix sigma = bloch(0.0, 1.0);
    const Eig2 er = eig2(rho);
    // Ideal values and masses, ascending eigenvalue order.
    const double w[2] = {expect(er.v_lo, to_matrix(h)) + std::log(er.lo) - free_energy,
                         expect(er.v_hi, to_matrix(h)) + std::log(er.hi) - free_energy};
    const double pm[2] = {expect(er.v_lo, sigma), expect(er.v_hi, sigma)};
    if (std::abs(w[0] - w[1]) < 10 * bin) {
      ++redrawn;  // peaks too close to separate by nearest value
      continue;
    }
    ++pairs;
    const ProtocolPlan plan(DensityOperator(rho), h, 1.0, 5000);
    ProtocolConfig cfg;
    cfg.n_swaps = 5000;
    cfg.trajectories = m;
    cfg.seed = derive_seed(77, static_cast<std::uint64_t>(pairs));
    cfg.jobs = hardware_jobs();
    const auto samples = sample_protocol(plan, plan.stage_one_weights(DensityOperator(sigma)), cfg);

    const double cut = 0.5 * (w[0] + w[1]);
    const int lower = w[0] < w[1] ? 0 : 1;
    std::vector<double> cell[2];
    for (const auto& s : samples) cell[(s.work < cut) == (lower == 0) ? 0 : 1].push_back(s.work);
    for (int k = 0; k < 2; ++k) {
      const double frac = static_cast<double>(cell[k].size()) / static_cast<double>(m);
      const double sd = std::sqrt(pm[k] * (1 - pm[k]) / static_cast<double>(m));
      const double dev = sd > 0 ? std::abs(frac - pm[k]) / sd : (frac == pm[k] ? 0.0 : 1e9);
      worst_sigma = std::max(worst_sigma, dev);
      if (dev > 3.0) ++bad;
      if (cell[k].empty()) continue;
      // Mode of the histogram inside this outcome's cell.
      const double left = std::floor(*std::min_element(cell[k].begin(), cell[k].end()) / bin) * bin;
      std::vector<int> counts;
      for (const double x : cell[k]) {
        const auto idx = static_cast<std::size_t>((x - left) / bin);
        if (idx >= counts.size()) counts.resize(idx + 1, 0);
        ++counts[idx];
      }
      const auto mode = static_cast<double>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      const double centre = left + (mode + 0.5) * bin;
      const double loc = std::abs(centre - w[k]) / bin;
      worst_loc = std::max(worst_loc, loc);
      if (loc > 3.0) ++bad;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Outcome o;
  o.pass = bad == 0 && secs < 120.0;
  o.detail = "20 pairs (" + std::to_string(redrawn) + " redrawn), worst location " +
             fmt("%.2f", worst_loc) + " bins, worst mass " + fmt("%.2f", worst_sigma) +
             " sigma, " + fmt("%.1f", secs) + " s";
  return o;
}

Outcome criterion2() {
  double worst = 0.0;
  int n = 0;
  for (int i = 0; i < 10; ++i) {
    const double p = 0.05 + 0.1 * i;
    for (int j = 0; j < 10; ++j) {
      const double r = j / 9.0;
      const HmmSource src = builtin_perturbed_coin(p, r);
      for (const double eps : {-0.4, -0.2, 0.0, 0.2, 0.4}) {
        const double ep = 2 * eps * (1 - 2 * p) * std::sqrt(1 - r);
        const double hi = 0.5 + 0.5 * std::sqrt(r + ep * ep);
        const double lo = 0.5 - 0.5 * std::sqrt(r + ep * ep);
        const DensityOperator xi = expected_state(belief_from_epsilon(eps), src);
        const Eig2 e = eig2(xi.matrix());
        const RVector lib = eigenvalues(xi);
        const double lib_lo = lib.minCoeff(), lib_hi = lib.maxCoeff();
        for (const double d : {e.lo - lo, e.hi - hi, lib_lo - lo, lib_hi - hi}) worst = std::max(worst, std::abs(d));
        ++n;
      }
    }
  }
  return {worst < 1e-10, std::to_string(n) + " points, max error " + fmt("%.2e", worst)};
}

Outcome criterion3() {
  int points = 0, bad = 0;
  double worst_gap = 0.0;
  for (const double r : {0.3, 0.6}) {
    for (const double p : {0.3, 0.4, 0.5, 0.6, 0.7}) {
      const HmmSource src = builtin_perturbed_coin(p, r);
      if (!(std::abs(1 - 2 * p) < std::sqrt(r)) || classify_regime(src) != Regime::apathetic) {
        ++bad;
        continue;
      }
      ++points;
      const double d = analytic_rate(src, policy_of(StrategyKind::memory_quantum)) -
                       analytic_rate(src, policy_of(StrategyKind::memoryless));
      worst_gap = std::max(worst_gap, std::abs(d));
      if (std::abs(d) >= 1e-9) ++bad;
    }
  }
  double worst_p_var = 0.0, worst_oracle = 0.0;
  std::vector<double> per_r;
  for (const double r : {0.1, 0.3, 0.6, 0.9}) {
    double lo = 1e300, hi = -1e300;
    for (int i = 1; i <= 9; ++i) {
      const double rate = analytic_rate(builtin_perturbed_coin(0.1 * i, r), policy_of(StrategyKind::memoryless));
      lo = std::min(lo, rate);
      hi = std::max(hi, rate);
      worst_oracle = std::max(worst_oracle, std::abs(rate - rel_entropy_gibbs(coin_xi(0.5, r, 0.0), 1.0)));
    }
    worst_p_var = std::max(worst_p_var, hi - lo);
    per_r.push_back(lo);
  }
  double min_r_step = 1e300;
  for (std::size_t i = 1; i < per_r.size(); ++i) min_r_step = std::min(min_r_step, std::abs(per_r[i] - per_r[i - 1]));
  const bool pass = bad == 0 && points == 10 && worst_p_var < 1e-9 && worst_oracle < 1e-9 && min_r_step > 1e-3;
  return {pass, std::to_string(points) + " apathetic points, max |i - iii| " + fmt("%.1e", worst_gap) +
                    ", p-variation " + fmt("%.1e", worst_p_var) + ", min r-step " + fmt("%.3f", min_r_step)};
}

Outcome criterion4() {
  double worst_formula = 0.0, worst_sigma = 0.0;
  bool ok = true;
  int k = 0;
  for (const auto& [p, r] : {std::pair{0.1, 0.1}, std::pair{0.8, 0.2}, std::pair{0.35, 0.05}}) {
    const HmmSource src = builtin_perturbed_coin(p, r);
    const StrategyPolicy pol = policy_of(StrategyKind::memory_quantum);
    const BeliefGraph g = enumerate_graph(src, pol);
    const auto mu = stationary_measure(g);
    std::vector<double> eps;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      if (mu[i] > 0) eps.push_back(g.nodes[i].belief[0] - 0.5);
    }
    if (eps.size() != 2) {
      ok = false;
      continue;
    }
    const CMatrix xa = coin_xi(p, r, eps[0]);
    const CMatrix xb = coin_xi(p, r, eps[1]);
    const double la = eig2(xa).hi, lb = eig2(xb).hi;
    const double oracle = (lb * rel_entropy_gibbs(xa, 1.0) + la * rel_entropy_gibbs(xb, 1.0)) / (la + lb);
    worst_formula = std::max(worst_formula, std::abs(work_rate(g, mu).to_double() - oracle));
    EngineConfig cfg;
    cfg.seed = 400 + static_cast<std::uint64_t>(k++);
    const EngineTrace tr = run_engine(src, pol, 5000, cfg);
    worst_sigma = std::max(worst_sigma, std::abs(tr.mean_work() - oracle) / tr.standard_error());
  }
  const bool pass = ok && worst_formula < 1e-10 && worst_sigma <= 3.0;
  return {pass, "3 two-node points, formula error " + fmt("%.1e", worst_formula) + ", MC worst " +
                    fmt("%.2f", worst_sigma) + " sigma"};
}

Outcome criterion5() {
  const int n = 400;
  const double h = 0.98 / (n - 1);
  bool pass = true;
  std::string detail;
  for (const double r : {0.1, 0.3}) {
    std::vector<double> ps(n), gain(n), rate(n);
    for (int i = 0; i < n; ++i) {
      ps[i] = 0.01 + h * i;
      const HmmSource src = builtin_perturbed_coin(ps[i], r);
      rate[i] = analytic_rate(src, policy_of(StrategyKind::memory_quantum));
      gain[i] = rate[i] - analytic_rate(src, policy_of(StrategyKind::memoryless));
    }
    auto fam = [r](double p) { return builtin_perturbed_coin(p, r); };
    const auto lower = phase_boundary(fam, policy_of(StrategyKind::memory_quantum), 1e-6, 0.5 - 1e-6);
    const auto upper = phase_boundary(fam, policy_of(StrategyKind::memory_quantum), 0.5 + 1e-6, 1 - 1e-6);
    if (!lower || !upper) {
      pass = false;
      detail += " r=" + fmt("%.1f", r) + " no boundary;";
      continue;
    }
    // Oracle boundary |1 - 2p| = sqrt(r).
    const double oracle_lo = 0.5 * (1 - std::sqrt(r));
    pass = pass && std::abs(*lower - oracle_lo) < 1e-6 && std::abs(*upper - (1 - oracle_lo)) < 1e-6;
    double kink[2] = {0, 0}, best[2] = {-1, -1};
    for (int i = 1; i + 1 < n; ++i) {
      const double d2 = std::abs(rate[i + 1] - 2 * rate[i] + rate[i - 1]);
      const int side = ps[i] < 0.5 ? 0 : 1;
      if (d2 > best[side]) {
        best[side] = d2;
        kink[side] = ps[i];
      }
    }
    const double off = std::max(std::abs(kink[0] - *lower), std::abs(kink[1] - *upper));
    pass = pass && off <= h;
    int wrong = 0;
    for (int i = 0; i < n; ++i) {
      const bool apathetic = ps[i] > *lower && ps[i] < *upper;
      if (apathetic ? !(gain[i] < 1e-9) : !(gain[i] > 0)) ++wrong;
    }
    pass = pass && wrong == 0;
    detail += " r=" + fmt("%.1f", r) + ": p*=" + fmt("%.5f", *lower) + "/" + fmt("%.5f", *upper) +
              " kink offset " + fmt("%.5f", off) + " (h=" + fmt("%.5f", h) + "), sign errors " +
              std::to_string(wrong) + ";";
  }
  return {pass, detail};
}

Outcome criterion6() {
  int violations = 0, points = 0;
  double worst = 0.0;
  for (int i = 0; i < 21; ++i) {
    const double p = 0.02 + 0.048 * i;
    for (int j = 0; j < 21; ++j) {
      const double r = j / 20.0;
      const HmmSource src = builtin_perturbed_coin(p, r);
      const double qi = analytic_rate(src, policy_of(StrategyKind::memory_quantum));
      const double qii = analytic_rate(src, policy_of(StrategyKind::memory_classical));
      const double qiii = analytic_rate(src, policy_of(StrategyKind::memoryless));
      worst = std::min({worst, qi - qii, qi - qiii});
      if (qi < qii - 1e-9 || qi < qiii - 1e-9) ++violations;
      ++points;
    }
  }
  // ln N slope where beliefs sit near a latent state (small r).
  double worst_rel = 0.0, large_r_rel = 0.0;
  for (const double r : {0.0, 0.02, 0.05, 0.3}) {
    for (const double p : {0.1, 0.2, 0.3, 0.4, 0.7}) {
      const HmmSource src = builtin_perturbed_coin(p, r);
      const double a = analytic_rate(src, policy_of(StrategyKind::overcommit, 100));
      const double b = analytic_rate(src, policy_of(StrategyKind::overcommit, 1000));
      const double c = analytic_rate(src, policy_of(StrategyKind::overcommit, 10000));
      const double predicted = -(1 - r) * std::min(p, 1 - p);
      for (const double slope : {(b - a) / std::log(10.0), (c - b) / std::log(10.0)}) {
        const double rel = std::abs(slope / predicted - 1);
        if (r <= 0.05) {
          worst_rel = std::max(worst_rel, rel);
        } else {
          large_r_rel = std::max(large_r_rel, rel);
        }
      }
    }
  }
  const bool pass = violations == 0 && worst_rel < 0.05;
  return {pass, std::to_string(points) + " grid points, " + std::to_string(violations) +
                    " ordering violations (min margin " + fmt("%.1e", worst) + "); ln N slope within " +
                    fmt("%.1f", 100 * worst_rel) + "% for r <= 0.05 (info: " + fmt("%.0f", 100 * large_r_rel) +
                    "% at r = 0.3)"};
}

Outcome criterion7() {
  CMatrix t(2, 2);
  t << 0.85, 0.1, 0.1, 0.15;
  const DensityOperator target(t);
  const double e[] = {0.0, 1.0};
  const HermitianOperator h = HermitianOperator::diagonal(e);
  const std::vector<int> ns{10, 20, 50, 100, 200, 500, 1000, 2000};
  ProtocolConfig cfg;
  cfg.trajectories = 20000;
  cfg.seed = 1;
  cfg.jobs = hardware_jobs();
  const auto pts = battery_convergence(target, h, ns, cfg);
  const double available = rel_entropy_gibbs(t, 1.0);
  std::vector<double> nd, deficit;
  int drops = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    nd.push_back(pts[i].n_swaps);
    deficit.push_back(available - pts[i].mean);
    if (i > 0) {
      const double tol = 3 * std::hypot(pts[i].standard_error, pts[i - 1].standard_error);
      if (pts[i].mean < pts[i - 1].mean - tol) ++drops;
    }
  }
  const double r2 = r_squared_inverse_n(nd, deficit);
  return {drops == 0 && r2 > 0.99,
          "N = 10..2000, " + std::to_string(drops) + " non-monotone steps, R^2 = " + fmt("%.4f", r2)};
}

// D[rho || sigma] from dense spectra (real symmetric or complex Hermitian).
double dense_rel_entropy(const CMatrix& rho, const CMatrix& sigma) {
  const Eigen::SelfAdjointEigenSolver<CMatrix> a(rho), b(sigma);
  auto logm = [](const Eigen::SelfAdjointEigenSolver<CMatrix>& s) {
    RVector l = s.eigenvalues();
    for (int i = 0; i < l.size(); ++i) l(i) = l(i) > 1e-300 ? std::log(l(i)) : 0.0;
    return CMatrix(s.eigenvectors() * l.asDiagonal() * s.eigenvectors().adjoint());
  };
  return (rho * (logm(a) - logm(b))).trace().real();
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Marginal of site l in an L-qubit joint state.
CMatrix site_marginal(const CMatrix& joint, int length, int l) {
  CMatrix out = CMatrix::Zero(2, 2);
  const int dim = 1 << length;
  const int shift = length - 1 - l;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      if ((i & ~(1 << shift)) != (j & ~(1 << shift))) continue;
      out((i >> shift) & 1, (j >> shift) & 1) += joint(i, j);
    }
  return out;
}

Outcome criterion8() {
  std::vector<HmmSource> sources;
  for (const double p : {0.1, 0.3, 0.8})
    for (const double r : {0.1, 0.5}) sources.push_back(builtin_perturbed_coin(p, r));
  for (const double r : {0.1, 0.5}) sources.push_back(builtin_golden_mean(r));

  // (a) engine time averages below the ideal bracket.
  int runs = 0, over = 0;
  double margin = 1e300;
  std::uint64_t seed = 800;
  for (const HmmSource& src : sources) {
    const WorkBracket b = w_ideal(src, entropy_profile(src, 8));
    for (const StrategyKind k : kAllStrategies) {
      EngineConfig cfg;
      cfg.seed = seed++;
      const EngineTrace tr = run_engine(src, policy_of(k), 5000, cfg);
      const double slack = b.upper + 3 * tr.standard_error() - tr.mean_work();
      margin = std::min(margin, slack);
      if (!(slack >= 0)) ++over;
      ++runs;
    }
  }
  // (b) free-energy decomposition identity.
  double worst_identity = 0.0;
  const CMatrix gamma = [] {
    CMatrix g = CMatrix::Zero(2, 2);
    const double z = 1 + std::exp(-1.0);
    g(0, 0) = 1 / z;
    g(1, 1) = std::exp(-1.0) / z;
    return g;
  }();
  for (const HmmSource& src : sources) {
    for (int len = 1; len <= 3; ++len) {
      const CMatrix joint = joint_state(src, len).matrix();
      CMatrix gam = gamma, prod = site_marginal(joint, len, 0);
      double local = rel_entropy_gibbs(site_marginal(joint, len, 0), 1.0);
      for (int l = 1; l < len; ++l) {
        gam = kron(gam, gamma);
        prod = kron(prod, site_marginal(joint, len, l));
        local += rel_entropy_gibbs(site_marginal(joint, len, l), 1.0);
      }
      const double total = dense_rel_entropy(joint, gam);
      const double corr = dense_rel_entropy(joint, prod);
      const FreeEnergyDecomposition lib = free_energy_decomposition(src, len);
      worst_identity = std::max({worst_identity, std::abs(total - corr - local), std::abs(lib.residual()),
                                 std::abs(lib.total_relative_entropy - total)});
    }
  }
  // (c) memory never lowers the average non-equilibrium free energy.
  int graphs = 0, broken = 0;
  for (const HmmSource& src : sources) {
    const double base = rel_entropy_gibbs(expected_state(src.stationary(), src).matrix(), 1.0);
    for (const StrategyKind k : {StrategyKind::memory_quantum, StrategyKind::memory_classical}) {
      const BeliefGraph g = enumerate_graph(src, policy_of(k));
      const auto mu = stationary_measure(g);
      double avg = 0.0;
      for (std::size_t i = 0; i < mu.size(); ++i) {
        if (mu[i] > 0) avg += mu[i] * rel_entropy_gibbs(expected_state(g.nodes[i].belief, src).matrix(), 1.0);
      }
      if (avg < base - 1e-10) ++broken;
      ++graphs;
    }
  }
  const bool pass = over == 0 && worst_identity < 1e-9 && broken == 0;
  return {pass, std::to_string(runs) + " engine runs (min slack " + fmt("%.3f", margin) +
                    "), identity error " + fmt("%.1e", worst_identity) + ", " + std::to_string(graphs) +
                    " graphs with " + std::to_string(broken) + " inequality failures"};
}

Outcome criterion9() {
  int identical = 0, differ = 0;
  std::string which;
  for (const std::string& name : cli::preset_names()) {
    cli::RunOptions a;
    a.preset = name;
    a.jobs = 1;
    cli::RunOptions b = a;
    b.jobs = 2;
    const std::string cmd = cli::preset_command(name);
    const std::string first = cli::execute(cmd, cli::preset_spec(name), a);
    const std::string second = cli::execute(cmd, cli::preset_spec(name), b);
    if (first == second) {
      ++identical;
    } else {
      ++differ;
      which += " " + name;
    }
  }
  return {differ == 0, std::to_string(identical) + " presets byte-identical across runs" +
                           (differ ? ", differing:" + which : std::string())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"oracle equivalence of finite-N histograms", criterion1},
      {"expected-state closed form", criterion2},
      {"apathetic rate equals memoryless", criterion3},
      {"advantage two-node rate", criterion4},
      {"phase boundary sharpness", criterion5},
      {"ordering and overcommit ln N slope", criterion6},
      {"battery convergence", criterion7},
      {"second-law suite", criterion8},
      {"preset determinism", criterion9},
  };
  // Optional argument: comma-free list of criterion numbers to run.
  std::vector<bool> run(criteria.size(), argc < 2);
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k >= 1 && k <= static_cast<int>(criteria.size())) run[static_cast<std::size_t>(k - 1)] = true;
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!run[i]) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %zu %s: %s -- %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
