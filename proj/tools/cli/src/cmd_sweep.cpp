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

#include "commands.hpp"
#include "spec_util.hpp"
#include "worker_pool.hpp"

#include "qpe/csv.hpp"
#include "qpe/errors.hpp"
#include "qpe/metadynamics.hpp"
#include "qpe/protocol_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace qpe::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class SweepMode { analytic, monte_carlo, both };

struct McParams {
  int steps = 5000;
  EngineMode engine = EngineMode::ideal;
  int n_swaps = 200;
  int batches = 50;
  double symmetry_offset = 0.01;
};

struct SweepPlan {
  std::vector<SourceChoice> points;
  std::vector<StrategyKind> policies;
  SweepMode mode = SweepMode::analytic;
  McParams mc;
  double temperature = 1.0;
  int overcommit_n = 200;
  GraphOptions graph;
  std::uint64_t seed = 0;
};

EngineMode parse_engine(const std::string& name, const std::string& pointer) {
  if (name == "ideal") return EngineMode::ideal;
  if (name == "finite_n") return EngineMode::finite_n;
  throw ValidationError("spec " + pointer + ": unknown engine '" + name + "' (ideal, finite_n)");
}

void check_range(double v, double lo, double hi, const std::string& pointer) {
  if (!(v >= lo && v <= hi)) {
    throw ValidationError("spec " + pointer + ": value " + format_double(v) + " outside [" +
                          format_double(lo) + ", " + format_double(hi) + "]");
  }
}

SweepPlan parse_sweep(const nlohmann::json& spec, const std::string& command) {
  SpecReader rd(spec, "");
  if (rd.has("command") && rd.string("command") != command) {
    throw ValidationError("spec /command: spec is for '" + spec["command"].get<std::string>() +
                          "', not '" + command + "'");
  }
  SweepPlan plan;
  if (rd.has("model")) {
    SourceChoice s = read_source(rd);
    plan.points.push_back(std::move(s));
  } else {
    std::vector<Family> families;
    const std::string fam_key = rd.has("families") ? "families" : "family";
    const auto names = rd.strings(fam_key, std::vector<std::string>{"perturbed_coin"});
    for (std::size_t i = 0; i < names.size(); ++i) {
      families.push_back(parse_family(names[i], rd.pointer(fam_key) + "/" + std::to_string(i)));
    }
    bool any_p = false;
    for (const Family f : families) any_p = any_p || family_uses_p(f);
    const std::vector<double> ps = any_p ? rd.grid("p") : std::vector<double>{kNaN};
    const std::vector<double> rs = rd.grid("r");
    const double gap = rd.number("energy_gap", 1.0);
    for (const double p : ps) check_range(p, 0.0, 1.0, rd.pointer("p"));
    for (const double r : rs) check_range(r, 0.0, 1.0, rd.pointer("r"));
    for (const Family f : families) {
      const std::vector<double> fp = family_uses_p(f) ? ps : std::vector<double>{kNaN};
      for (const double p : fp) {
        for (const double r : rs) {
          SourceChoice s;
          s.family = f;
          s.p = p;
          s.r = r;
          s.energy_gap = gap;
          plan.points.push_back(s);
        }
      }
    }
  }
  const auto policies = rd.strings("policies", std::vector<std::string>{
                                                   "memory_quantum", "memory_classical",
                                                   "memoryless", "overcommit"});
  for (std::size_t i = 0; i < policies.size(); ++i) {
    plan.policies.push_back(parse_policy(policies[i], rd.pointer("policies") + "/" + std::to_string(i)));
  }
  const std::string mode = rd.string("mode", "analytic");
  if (mode == "analytic") {
    plan.mode = SweepMode::analytic;
  } else if (mode == "monte_carlo") {
    plan.mode = SweepMode::monte_carlo;
  } else if (mode == "both") {
    plan.mode = SweepMode::both;
  } else {
    throw ValidationError("spec /mode: expected analytic, monte_carlo or both");
  }
  plan.temperature = rd.number("temperature", 1.0);
  if (!(plan.temperature > 0.0)) throw ValidationError("spec /temperature: must be positive");
  plan.overcommit_n = rd.integer("overcommit_n", 200);
  if (plan.overcommit_n < 1) throw ValidationError("spec /overcommit_n: must be at least 1");
  if (rd.has("max_nodes")) {
    const int cap = rd.integer("max_nodes");
    if (cap < 1) throw ValidationError("spec /max_nodes: must be at least 1");
    plan.graph.max_nodes = static_cast<std::size_t>(cap);
  }
  const auto seed = rd.seed();
  if (rd.has("monte_carlo")) {
    SpecReader mc = rd.object("monte_carlo");
    plan.mc.steps = mc.integer("steps", plan.mc.steps);
    plan.mc.engine = parse_engine(mc.string("engine", "ideal"), mc.pointer("engine"));
    plan.mc.n_swaps = mc.integer("n_swaps", plan.mc.n_swaps);
    plan.mc.batches = mc.integer("batches", plan.mc.batches);
    plan.mc.symmetry_offset = mc.number("symmetry_offset", plan.mc.symmetry_offset);
    mc.finish();
    if (plan.mc.steps < 1) throw ValidationError("spec /monte_carlo/steps: must be at least 1");
    if (plan.mc.n_swaps < 1) throw ValidationError("spec /monte_carlo/n_swaps: must be at least 1");
    if (plan.mc.batches < 2) throw ValidationError("spec /monte_carlo/batches: must be at least 2");
    check_range(plan.mc.symmetry_offset, 0.0, 0.5, "/monte_carlo/symmetry_offset");
  }
  if (plan.mode != SweepMode::analytic) plan.seed = require_seed(seed, "monte_carlo sweeps");
  rd.finish();
  return plan;
}

std::string error_text(const std::exception& e) { return sanitize_cell(e.what()); }

struct PointResult {
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> blank_row(const SourceChoice& s, const std::string& policy,
                                   const std::string& mode, const std::string& regime,
                                   const std::string& error) {
  return {s.label(), format_double(s.p_column()), format_double(s.r_column()), policy, mode,
          "", "", "", "", regime, error};
}

}  // namespace

std::string cmd_sweep(const nlohmann::json& spec, int jobs, bool dry_run) {
  const SweepPlan plan = parse_sweep(spec, "sweep");
  if (dry_run) return {};
  const bool analytic = plan.mode != SweepMode::monte_carlo;
  const bool mc = plan.mode != SweepMode::analytic;

  std::vector<PointResult> results(plan.points.size());
  parallel_for(plan.points.size(), jobs, [&](std::size_t i) {
    const SourceChoice& choice = plan.points[i];
    PointResult& out = results[i];
    std::optional<HmmSource> src;
    std::string regime;
    try {
      src.emplace(choice.build());
    } catch (const std::exception& e) {
      for (const StrategyKind k : plan.policies) {
        if (analytic) out.rows.push_back(blank_row(choice, to_string(k), "analytic", "", error_text(e)));
        if (mc) out.rows.push_back(blank_row(choice, to_string(k), "monte_carlo", "", error_text(e)));
      }
      return;
    }
    try {
      regime = to_string(classify_regime(*src, plan.temperature));
    } catch (const std::exception&) {
      regime = "";
    }
    for (std::size_t k = 0; k < plan.policies.size(); ++k) {
      StrategyPolicy policy;
      policy.kind = plan.policies[k];
      policy.temperature = plan.temperature;
      policy.overcommit_n = plan.overcommit_n;
      const std::string name = to_string(policy.kind);
      if (analytic) {
        try {
          const BeliefGraph g = enumerate_graph(*src, policy, plan.graph);
          const ExtendedReal rate = work_rate(g, stationary_measure(g));
          out.rows.push_back({choice.label(), format_double(choice.p_column()),
                              format_double(choice.r_column()), name, "analytic",
                              format_double(rate.to_double()), format_double(0.0),
                              std::to_string(g.recurrent_node_count()), g.closed ? "1" : "0",
                              regime, ""});
        } catch (const std::exception& e) {
          out.rows.push_back(blank_row(choice, name, "analytic", regime, error_text(e)));
        }
      }
      if (mc) {
        try {
          EngineConfig cfg;
          cfg.mode = plan.mc.engine;
          cfg.n_swaps = plan.mc.n_swaps;
          cfg.symmetry_offset = plan.mc.symmetry_offset;
          cfg.seed = derive_seed(plan.seed, i * plan.policies.size() + k);
          const EngineTrace tr = run_engine(*src, policy, plan.mc.steps, cfg);
          out.rows.push_back({choice.label(), format_double(choice.p_column()),
                              format_double(choice.r_column()), name, "monte_carlo",
                              format_double(tr.mean_work()),
                              format_double(tr.standard_error(plan.mc.batches)), "", "", regime,
                              ""});
        } catch (const std::exception& e) {
          out.rows.push_back(blank_row(choice, name, "monte_carlo", regime, error_text(e)));
        }
      }
    }
  });

  CsvWriter csv({"family", "p", "r", "policy", "mode", "work_rate", "stderr",
                 "recurrent_node_count", "graph_closed", "regime_flag", "error"});
  for (auto& r : results) {
    for (auto& row : r.rows) csv.add_row(std::move(row));
  }
  return csv.str();
}

std::string cmd_phase(const nlohmann::json& spec, int jobs, bool dry_run) {
  SpecReader rd(spec, "");
  if (rd.has("command") && rd.string("command") != "phase") {
    throw ValidationError("spec /command: spec is not for 'phase'");
  }
  const Family family = parse_family(rd.string("family", "perturbed_coin"), rd.pointer("family"));
  if (!family_uses_p(family)) {
    throw ValidationError("spec /family: phase boundaries need a family parameterized by p");
  }
  std::vector<double> rs = rd.grid("r");
  for (const double r : rs) check_range(r, 0.0, 1.0, rd.pointer("r"));
  StrategyPolicy policy;
  policy.kind = parse_policy(rd.string("policy", "memory_quantum"), rd.pointer("policy"));
  policy.temperature = rd.number("temperature", 1.0);
  if (!(policy.temperature > 0.0)) throw ValidationError("spec /temperature: must be positive");
  const double gap = rd.number("energy_gap", 1.0);
  const double tol = rd.number("tolerance", 1e-8);
  const double margin = rd.number("margin", 1e-6);
  if (!(tol > 0.0)) throw ValidationError("spec /tolerance: must be positive");
  check_range(margin, 1e-12, 0.25, rd.pointer("margin"));
  rd.seed();  // accepted for a uniform header; unused
  rd.finish();
  if (dry_run) return {};

  std::sort(rs.begin(), rs.end());
  struct Row {
    std::optional<double> lower, upper;
    std::string error;
  };
  std::vector<Row> rows(rs.size());
  parallel_for(rs.size(), jobs, [&](std::size_t i) {
    const double r = rs[i];
    auto fam = [&](double p) { return make_source(family, p, r, gap); };
    try {
      rows[i].lower = phase_boundary(fam, policy, margin, 0.5 - margin, tol);
      rows[i].upper = phase_boundary(fam, policy, 0.5 + margin, 1.0 - margin, tol);
    } catch (const std::exception& e) {
      rows[i].error = error_text(e);
    }
  });
  CsvWriter csv({"r", "p_lower", "p_upper", "flag"});
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const Row& row = rows[i];
    std::string flag;
    if (!row.error.empty()) {
      flag = "error: " + row.error;
    } else if (row.lower && row.upper) {
      flag = "ok";
    } else if (!row.lower && !row.upper) {
      flag = "no_boundary";
    } else {
      flag = row.lower ? "lower_only" : "upper_only";
    }
    csv.add_row({format_double(rs[i]), format_double(row.lower.value_or(kNaN)),
                 format_double(row.upper.value_or(kNaN)), flag});
  }
  return csv.str();
}

}  // namespace qpe::cli
