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

#include "qpe/source.hpp"

#include "qpe/errors.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <sstream>

namespace qpe {

namespace {

std::string quote(const std::string& s) { return "'" + s + "'"; }

// Number of closed strongly connected components of the support graph.
int count_closed_classes(const RMatrix& m) {
  const int n = static_cast<int>(m.rows());
  std::vector<int> index(n, -1);
  std::vector<int> low(n, 0);
  std::vector<int> comp(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<int> stack;
  int counter = 0;
  int comps = 0;
  std::function<void(int)> visit = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = 1;
    for (int w = 0; w < n; ++w) {
      if (!(m(v, w) > 0.0)) continue;
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      int w = -1;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = 0;
        comp[w] = comps;
      } while (w != v);
      ++comps;
    }
  };
  for (int v = 0; v < n; ++v) {
    if (index[v] < 0) visit(v);
  }
  std::vector<char> has_exit(comps, 0);
  for (int v = 0; v < n; ++v) {
    for (int w = 0; w < n; ++w) {
      if (m(v, w) > 0.0 && comp[v] != comp[w]) has_exit[comp[v]] = 1;
    }
  }
  return static_cast<int>(std::count(has_exit.begin(), has_exit.end(), 0));
}

// Uniform double in [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i];
  }
  return os.str();
}

ValidationReport validate(const SourceDefinition& def) {
  ValidationReport rep;
  auto fail = [&rep](std::string msg) { rep.violations.push_back(std::move(msg)); };

  const int ns = static_cast<int>(def.states.size());
  const int nx = static_cast<int>(def.alphabet.size());
  if (ns == 0) fail("states: at least one latent state is required");
  if (nx == 0) fail("alphabet: at least one symbol is required");
  if (std::set<std::string>(def.states.begin(), def.states.end()).size() != def.states.size()) {
    fail("states: labels must be unique");
  }
  if (std::set<std::string>(def.alphabet.begin(), def.alphabet.end()).size() !=
      def.alphabet.size()) {
    fail("alphabet: labels must be unique");
  }
  if (static_cast<int>(def.transitions.size()) != nx) {
    fail("transitions: expected one matrix per symbol (" + std::to_string(nx) + "), got " +
         std::to_string(def.transitions.size()));
  }
  if (static_cast<int>(def.outputs.size()) != nx) {
    fail("outputs: expected one density matrix per symbol (" + std::to_string(nx) + "), got " +
         std::to_string(def.outputs.size()));
  }
  if (!rep.ok()) return rep;

  bool shapes_ok = true;
  RMatrix total = RMatrix::Zero(ns, ns);
  for (int x = 0; x < nx; ++x) {
    const RMatrix& t = def.transitions[static_cast<std::size_t>(x)];
    const std::string where = "transitions[" + quote(def.alphabet[static_cast<std::size_t>(x)]) + "]";
    if (t.rows() != ns || t.cols() != ns) {
      fail(where + ": expected " + std::to_string(ns) + "x" + std::to_string(ns) + ", got " +
           std::to_string(t.rows()) + "x" + std::to_string(t.cols()));
      shapes_ok = false;
      continue;
    }
    for (int i = 0; i < ns; ++i) {
      for (int j = 0; j < ns; ++j) {
        const double v = t(i, j);
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
          std::ostringstream os;
          os << where << " row " << i << " (state " << quote(def.states[static_cast<std::size_t>(i)])
             << ") column " << j << ": probability " << v << " outside [0, 1]";
          fail(os.str());
        }
      }
    }
    total += t;
  }
  if (shapes_ok) {
    for (int i = 0; i < ns; ++i) {
      const double sum = total.row(i).sum();
      if (!(std::abs(sum - 1.0) <= kRowSumTolerance)) {
        std::ostringstream os;
        os.precision(17);
        os << "row " << i << " (state " << quote(def.states[static_cast<std::size_t>(i)])
           << ") of sum_x T^(x) sums to " << sum << ", expected 1";
        fail(os.str());
      }
    }
    if (rep.ok() && count_closed_classes(total) != 1) {
      fail("sum_x T^(x) must have a single recurrent class");
    }
  }

  const Eigen::Index d = def.hamiltonian.rows();
  if (d == 0 || def.hamiltonian.cols() != d) {
    fail("hamiltonian: must be a non-empty square matrix");
  } else {
    try {
      HermitianOperator h(def.hamiltonian);
      for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
          if (!std::isfinite(def.hamiltonian(i, j).real()) ||
              !std::isfinite(def.hamiltonian(i, j).imag())) {
            throw ValidationError("non-finite entry");
          }
        }
      }
    } catch (const ValidationError& e) {
      fail(std::string("hamiltonian: ") + e.what());
    }
  }
  for (int x = 0; x < nx; ++x) {
    const CMatrix& o = def.outputs[static_cast<std::size_t>(x)];
    const std::string where = "outputs[" + quote(def.alphabet[static_cast<std::size_t>(x)]) + "]";
    if (o.rows() != d || o.cols() != d) {
      fail(where + ": dimension " + std::to_string(o.rows()) + "x" + std::to_string(o.cols()) +
           " differs from hamiltonian dimension " + std::to_string(d));
      continue;
    }
    try {
      DensityOperator rho(o);
    } catch (const ValidationError& e) {
      fail(where + ": " + e.what());
    }
  }

  if (def.initial_belief) {
    const RVector& b = *def.initial_belief;
    if (b.size() != ns) {
      fail("initial_belief: expected " + std::to_string(ns) + " entries, got " +
           std::to_string(b.size()));
    } else {
      try {
        BeliefState tmp(b);
      } catch (const ValidationError& e) {
        fail(std::string("initial_belief: ") + e.what());
      }
    }
  }
  return rep;
}

RVector stationary_distribution(const RMatrix& markov) {
  const Eigen::Index n = markov.rows();
  RVector pi;
  if (n <= 8) {
    RMatrix a = markov.transpose() - RMatrix::Identity(n, n);
    a.row(n - 1).setOnes();
    RVector b = RVector::Zero(n);
    b(n - 1) = 1.0;
    pi = a.fullPivLu().solve(b);
  } else {
    const RMatrix lazy = 0.5 * (markov + RMatrix::Identity(n, n));
    pi = RVector::Constant(n, 1.0 / static_cast<double>(n));
    for (int it = 0; it < 10000000; ++it) {
      RVector next = (pi.transpose() * lazy).transpose();
      next /= next.sum();
      const double change = (next - pi).lpNorm<1>();
      pi = std::move(next);
      if (change < 1e-15) break;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (pi(i) < 0.0) pi(i) = 0.0;
  }
  pi /= pi.sum();
  const double residual = ((pi.transpose() * markov).transpose() - pi).lpNorm<1>();
  if (!(residual <= 1e-12)) {
    throw ComputationError("stationary distribution did not converge (residual " +
                           std::to_string(residual) + ")");
  }
  return pi;
}

HmmSource::HmmSource(SourceDefinition def, std::vector<DensityOperator> outputs,
                     HermitianOperator hamiltonian, RMatrix markov, BeliefState stationary,
                     BeliefState initial)
    : def_(std::move(def)),
      outputs_(std::move(outputs)),
      hamiltonian_(std::move(hamiltonian)),
      markov_(std::move(markov)),
      stationary_(std::move(stationary)),
      initial_(std::move(initial)) {}

HmmSource HmmSource::from_definition(SourceDefinition def) {
  const ValidationReport rep = validate(def);
  if (!rep.ok()) throw ValidationError("invalid source: " + rep.summary());
  std::vector<DensityOperator> outputs;
  for (const CMatrix& o : def.outputs) outputs.emplace_back(o);
  HermitianOperator h(def.hamiltonian);
  RMatrix markov = RMatrix::Zero(static_cast<Eigen::Index>(def.states.size()),
                                 static_cast<Eigen::Index>(def.states.size()));
  for (const RMatrix& t : def.transitions) markov += t;
  BeliefState pi(stationary_distribution(markov));
  BeliefState initial = def.initial_belief ? BeliefState(*def.initial_belief) : pi;
  return HmmSource(std::move(def), std::move(outputs), std::move(h), std::move(markov),
                   std::move(pi), std::move(initial));
}

Realization sample(const HmmSource& src, int length, std::uint64_t seed,
                   const BeliefState& initial) {
  if (length < 1) throw ValidationError("sample length must be at least 1");
  if (initial.size() != src.num_states()) {
    throw ValidationError("initial belief has wrong number of states");
  }
  std::mt19937_64 rng(seed);
  Realization out;
  out.seed = seed;
  out.length = length;
  out.latent_path.reserve(static_cast<std::size_t>(length) + 1);
  out.symbol_path.reserve(static_cast<std::size_t>(length));

  const int ns = src.num_states();
  const int nx = src.alphabet_size();
  auto pick_state = [&](const RVector& w) {
    double u = uniform01(rng) * w.sum();
    int last = -1;
    for (int i = 0; i < w.size(); ++i) {
      if (w(i) <= 0.0) continue;
      last = i;
      if (u < w(i)) return i;
      u -= w(i);
    }
    return last;
  };
  int s = pick_state(initial.probs());
  out.latent_path.push_back(s);
  for (int t = 0; t < length; ++t) {
    const double u = uniform01(rng);
    double acc = 0.0;
    int chosen_x = -1;
    int chosen_s = -1;
    for (int x = 0; x < nx; ++x) {
      const RMatrix& tm = src.transition(x);
      for (int j = 0; j < ns; ++j) {
        const double w = tm(s, j);
        if (w <= 0.0) continue;
        acc += w;
        chosen_x = x;
        chosen_s = j;
        if (u < acc) goto picked;
      }
    }
    // Rounding can leave u above the accumulated row mass; the last
    // admissible pair is kept.
  picked:
    out.symbol_path.push_back(chosen_x);
    out.latent_path.push_back(chosen_s);
    s = chosen_s;
  }
  return out;
}

JointStateBuilder::JointStateBuilder(const HmmSource& src, std::size_t cap)
    : src_(&src), cap_(cap) {
  const BeliefState& pi = src.stationary();
  blocks_.reserve(static_cast<std::size_t>(src.num_states()));
  for (int s = 0; s < src.num_states(); ++s) {
    blocks_.push_back(CMatrix::Constant(1, 1, Complex(pi[s], 0.0)));
  }
}

void JointStateBuilder::extend() {
  const auto d = static_cast<std::size_t>(src_->dim());
  const auto cur = static_cast<std::size_t>(blocks_.front().rows());
  if (cur * d > cap_) {
    throw ValidationError("joint state dimension " + std::to_string(cur * d) + " exceeds cap " +
                          std::to_string(cap_));
  }
  const int ns = src_->num_states();
  const int nx = src_->alphabet_size();
  const auto next_dim = static_cast<Eigen::Index>(cur * d);
  std::vector<CMatrix> next(static_cast<std::size_t>(ns), CMatrix::Zero(next_dim, next_dim));
  CMatrix k(next_dim, next_dim);
  for (int s = 0; s < ns; ++s) {
    const CMatrix& b = blocks_[static_cast<std::size_t>(s)];
    for (int x = 0; x < nx; ++x) {
      const RMatrix& t = src_->transition(x);
      if (t.row(s).maxCoeff() <= 0.0) continue;
      const CMatrix& sig = src_->output(x).matrix();
      for (Eigen::Index i = 0; i < b.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
          k.block(i * sig.rows(), j * sig.cols(), sig.rows(), sig.cols()) = b(i, j) * sig;
        }
      }
      for (int s2 = 0; s2 < ns; ++s2) {
        if (t(s, s2) > 0.0) next[static_cast<std::size_t>(s2)] += t(s, s2) * k;
      }
    }
  }
  blocks_ = std::move(next);
  ++length_;
}

CMatrix JointStateBuilder::joint_matrix() const {
  CMatrix out = blocks_.front();
  for (std::size_t s = 1; s < blocks_.size(); ++s) out += blocks_[s];
  return out;
}

DensityOperator joint_state(const HmmSource& src, int length, std::size_t cap) {
  if (length < 1) throw ValidationError("joint_state length must be at least 1");
  std::size_t total = 1;
  for (int l = 0; l < length; ++l) {
    total *= static_cast<std::size_t>(src.dim());
    if (total > cap) {
      throw ValidationError("joint state dimension exceeds cap " + std::to_string(cap));
    }
  }
  JointStateBuilder builder(src, cap);
  for (int l = 0; l < length; ++l) builder.extend();
  return DensityOperator::assume_valid(builder.joint_matrix());
}

namespace {

CMatrix psi_projector(double r) {
  const double c = std::sqrt(r * (1.0 - r));
  CMatrix m(2, 2);
  m << r, c, c, 1.0 - r;
  return m;
}

CMatrix qubit_hamiltonian(double gap) {
  CMatrix h = CMatrix::Zero(2, 2);
  h(1, 1) = gap;
  return h;
}

void check_r_gap(double r, double gap) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw ValidationError("r must lie in [0, 1], got " + std::to_string(r));
  }
  if (!std::isfinite(gap)) throw ValidationError("energy gap must be finite");
}

}  // namespace

SourceDefinition perturbed_coin_definition(double p, double r, double energy_gap) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ValidationError("p must lie in (0, 1), got " + std::to_string(p));
  }
  check_r_gap(r, energy_gap);
  SourceDefinition def;
  def.name = "perturbed_coin";
  def.states = {"A", "B"};
  def.alphabet = {"0", "1"};
  RMatrix t0(2, 2);
  t0 << 1.0 - p, 0.0, p, 0.0;
  RMatrix t1(2, 2);
  t1 << 0.0, p, 0.0, 1.0 - p;
  def.transitions = {t0, t1};
  CMatrix s0 = CMatrix::Zero(2, 2);
  s0(0, 0) = 1.0;
  def.outputs = {s0, psi_projector(r)};
  def.hamiltonian = qubit_hamiltonian(energy_gap);
  return def;
}

HmmSource builtin_perturbed_coin(double p, double r, double energy_gap) {
  return HmmSource::from_definition(perturbed_coin_definition(p, r, energy_gap));
}

SourceDefinition golden_mean_definition(double r, double energy_gap) {
  check_r_gap(r, energy_gap);
  SourceDefinition def;
  def.name = "golden_mean_2_1";
  def.states = {"A", "B", "C"};
  def.alphabet = {"0", "1"};
  // A --0 (1/2)--> A, A --1 (1/2)--> B, B --1--> C, C --0--> A.
  RMatrix t0 = RMatrix::Zero(3, 3);
  t0(0, 0) = 0.5;
  t0(2, 0) = 1.0;
  RMatrix t1 = RMatrix::Zero(3, 3);
  t1(0, 1) = 0.5;
  t1(1, 2) = 1.0;
  def.transitions = {t0, t1};
  CMatrix s0 = CMatrix::Zero(2, 2);
  s0(0, 0) = 1.0;
  def.outputs = {s0, psi_projector(r)};
  def.hamiltonian = qubit_hamiltonian(energy_gap);
  return def;
}

HmmSource builtin_golden_mean(double r, double energy_gap) {
  return HmmSource::from_definition(golden_mean_definition(r, energy_gap));
}

}  // namespace qpe
