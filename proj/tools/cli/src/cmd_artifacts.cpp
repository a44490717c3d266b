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

#include "cache.hpp"
#include "commands.hpp"
#include "spec_util.hpp"
#include "worker_pool.hpp"

#include "qpe/bounds.hpp"
#include "qpe/csv.hpp"
#include "qpe/errors.hpp"
#include "qpe/metadynamics.hpp"
#include "qpe/model_io.hpp"
#include "qpe/protocol_sim.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace qpe::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_command(SpecReader& rd, const std::string& command) {
  if (rd.has("command") && rd.string("command") != command) {
    throw ValidationError("spec /command: spec is not for '" + command + "'");
  }
}

StrategyPolicy read_policy(SpecReader& rd, const std::string& fallback) {
  StrategyPolicy policy;
  policy.kind = parse_policy(rd.string("policy", fallback), rd.pointer("policy"));
  policy.temperature = rd.number("temperature", 1.0);
  policy.overcommit_n = rd.integer("overcommit_n", 200);
  if (!(policy.temperature > 0.0)) throw ValidationError("spec /temperature: must be positive");
  if (policy.overcommit_n < 1) throw ValidationError("spec /overcommit_n: must be at least 1");
  return policy;
}

HermitianOperator qubit_hamiltonian(double gap) {
  const double e[] = {0.0, gap};
  return HermitianOperator::diagonal(e);
}

// Block entropies through the on-disk memo.
EntropyProfile cached_profile(const HmmSource& src, int max_length) {
  const std::string key = "block_entropy|L=" + std::to_string(max_length) + "|" +
                          write_model(src.definition());
  if (auto hit = cache_load(key); hit && static_cast<int>(hit->size()) == max_length) {
    return profile_from_block_entropies(std::move(*hit));
  }
  EntropyProfile p = entropy_profile(src, max_length);
  cache_store(key, p.block_entropy);
  return p;
}

}  // namespace

std::string cmd_returnmap(const nlohmann::json& spec, int /*jobs*/, bool dry_run) {
  SpecReader rd(spec, "");
  check_command(rd, "returnmap");
  const SourceChoice choice = read_source(rd);
  const StrategyPolicy policy = read_policy(rd, "memory_quantum");
  const int grid = rd.integer("grid_size", 401);
  if (grid < 2) throw ValidationError("spec /grid_size: must be at least 2");
  rd.seed();
  rd.finish();
  if (dry_run) return {};

  const ReturnMap map = return_map(choice.build(), policy, grid);
  if (map.num_branches() > 2) {
    throw ValidationError("returnmap: " + std::to_string(map.num_branches()) +
                          " work branches; the CSV schema holds two");
  }
  CsvWriter csv({"eps", "branch0_image", "branch0_probability", "branch1_image",
                 "branch1_probability", "identity", "swap"});
  for (std::size_t i = 0; i < map.grid().size(); ++i) {
    const double eps = map.grid()[i];
    std::vector<std::string> row{format_double(eps)};
    for (int b = 0; b < 2; ++b) {
      const bool ok = b < map.num_branches() && map.defined(b)[i];
      row.push_back(format_double(ok ? map.image(b)[i] : kNaN));
      row.push_back(format_double(b < map.num_branches() ? map.probability(b)[i] : 0.0));
    }
    row.push_back(format_double(eps));
    row.push_back(format_double(-eps));
    csv.add_row(std::move(row));
  }
  return csv.str();
}

std::string cmd_trace(const nlohmann::json& spec, int /*jobs*/, bool dry_run) {
  SpecReader rd(spec, "");
  check_command(rd, "trace");
  const SourceChoice choice = read_source(rd);
  const StrategyPolicy policy = read_policy(rd, "memory_quantum");
  const int steps = rd.integer("steps", 5000);
  EngineConfig cfg;
  const std::string mode = rd.string("mode", "finite_n");
  if (mode == "ideal") {
    cfg.mode = EngineMode::ideal;
  } else if (mode == "finite_n") {
    cfg.mode = EngineMode::finite_n;
  } else {
    throw ValidationError("spec /mode: expected ideal or finite_n");
  }
  cfg.n_swaps = rd.integer("n_swaps", 200);
  cfg.symmetry_offset = rd.number("symmetry_offset", 0.01);
  cfg.seed = require_seed(rd.seed(), "trace");
  rd.finish();
  if (steps < 1) throw ValidationError("spec /steps: must be at least 1");
  if (cfg.n_swaps < 1) throw ValidationError("spec /n_swaps: must be at least 1");
  if (!(cfg.symmetry_offset >= 0.0 && cfg.symmetry_offset <= 0.5)) {
    throw ValidationError("spec /symmetry_offset: must lie in [0, 1/2]");
  }
  if (dry_run) return {};
  return trace_to_csv(run_engine(choice.build(), policy, steps, cfg));
}

std::string cmd_bounds(const nlohmann::json& spec, int jobs, bool dry_run) {
  SpecReader rd(spec, "");
  check_command(rd, "bounds");
  std::vector<SourceChoice> points;
  if (rd.has("model")) {
    points.push_back(read_source(rd));
  } else {
    const std::string fam_key = rd.has("families") ? "families" : "family";
    const auto names = rd.strings(fam_key, std::vector<std::string>{"perturbed_coin"});
    std::vector<Family> families;
    bool any_p = false;
    for (std::size_t i = 0; i < names.size(); ++i) {
      families.push_back(parse_family(names[i], rd.pointer(fam_key) + "/" + std::to_string(i)));
      any_p = any_p || family_uses_p(families.back());
    }
    const std::vector<double> ps = any_p ? rd.grid("p") : std::vector<double>{kNaN};
    const std::vector<double> rs = rd.grid("r");
    const double gap = rd.number("energy_gap", 1.0);
    for (const Family f : families) {
      for (const double p : family_uses_p(f) ? ps : std::vector<double>{kNaN}) {
        for (const double r : rs) {
          SourceChoice s;
          s.family = f;
          s.p = p;
          s.r = r;
          s.energy_gap = gap;
          points.push_back(s);
        }
      }
    }
  }
  const int max_length = rd.integer("max_length", 8);
  const double temperature = rd.number("temperature", 1.0);
  rd.seed();
  rd.finish();
  if (max_length < 2 || max_length > 10) {
    throw ValidationError("spec /max_length: must lie in [2, 10]");
  }
  if (!(temperature > 0.0)) throw ValidationError("spec /temperature: must be positive");
  if (dry_run) return {};

  std::vector<std::vector<std::string>> rows(points.size());
  parallel_for(points.size(), jobs, [&](std::size_t i) {
    const SourceChoice& c = points[i];
    std::vector<std::string> row{c.label(), format_double(c.p_column()),
                                 format_double(c.r_column()), std::to_string(max_length)};
    try {
      const HmmSource src = c.build();
      const EntropyProfile prof = cached_profile(src, max_length);
      const WorkBracket b = w_ideal(src, prof, temperature);
      const DensityOperator xi0 = expected_state(src.stationary(), src);
      const ExtendedReal d = rel_entropy(xi0, gibbs_state(src.hamiltonian(), temperature));
      for (const double v : {prof.block_entropy.front(), prof.entropy_rate_estimate,
                             prof.convergence_gap, prof.excess_at(max_length), b.lower, b.upper,
                             temperature * d.to_double()}) {
        row.push_back(format_double(v));
      }
      row.emplace_back();
    } catch (const std::exception& e) {
      row.resize(11);
      row.push_back(sanitize_cell(e.what()));
    }
    rows[i] = std::move(row);
  });
  CsvWriter csv({"family", "p", "r", "max_length", "single_site_entropy", "entropy_rate",
                 "convergence_gap", "excess_entropy", "w_ideal_lower", "w_ideal_upper",
                 "memoryless_rate", "error"});
  for (auto& row : rows) csv.add_row(std::move(row));
  return csv.str();
}

std::string cmd_protocol(const nlohmann::json& spec, int jobs, bool dry_run) {
  SpecReader rd(spec, "");
  check_command(rd, "protocol");
  const std::string kind = rd.string("kind");
  const double temperature = rd.number("temperature", 1.0);
  const double gap = rd.number("energy_gap", 1.0);
  if (!(temperature > 0.0)) throw ValidationError("spec /temperature: must be positive");
  const DensityOperator target = read_state(rd.raw("target"), "/target");
  if (target.dim() != 2) throw ValidationError("spec /target: protocol simulation is qubit only");
  ProtocolConfig cfg;
  cfg.seed = require_seed(rd.seed(), "protocol");
  const int trajectories = rd.integer("trajectories", 100000);
  if (trajectories < 1) throw ValidationError("spec /trajectories: must be at least 1");
  cfg.trajectories = trajectories;
  cfg.jobs = jobs;
  const HermitianOperator h = qubit_hamiltonian(gap);

  if (kind == "histogram") {
    cfg.n_swaps = rd.integer("n_swaps", 22);
    const double bin_width = rd.number("bin_width", 0.1);
    if (!(bin_width > 0.0)) throw ValidationError("spec /bin_width: must be positive");
    if (cfg.n_swaps < 1) throw ValidationError("spec /n_swaps: must be at least 1");
    const nlohmann::json& sig = rd.raw("sigmas");
    if (!sig.is_array() || sig.empty()) throw ValidationError("spec /sigmas: expected a non-empty array");
    std::vector<std::pair<std::string, DensityOperator>> sigmas;
    for (std::size_t i = 0; i < sig.size(); ++i) {
      const std::string ptr = "/sigmas/" + std::to_string(i);
      SpecReader s(sig[i], ptr);
      const std::string label = sanitize_cell(s.string("label"));
      sigmas.emplace_back(label, read_state(s.raw("state"), ptr + "/state"));
      s.finish();
      if (sigmas.back().second.dim() != 2) throw ValidationError("spec " + ptr + ": qubit state expected");
    }
    rd.finish();
    if (dry_run) return {};
    CsvWriter csv({"sigma", "bin_left", "bin_right", "mass"});
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
      ProtocolConfig c = cfg;
      c.seed = derive_seed(cfg.seed, i);
      const WorkHistogram wh = work_histogram(target, sigmas[i].second, h, c, bin_width, temperature);
      const Histogram& hist = wh.histogram;
      for (std::size_t b = 0; b < hist.mass.size(); ++b) {
        const double left = hist.left + static_cast<double>(b) * hist.bin_width;
        csv.add_row({sigmas[i].first, format_double(left), format_double(left + hist.bin_width),
                     format_double(hist.mass[b])});
      }
    }
    return csv.str();
  }
  if (kind == "convergence") {
    const std::vector<int> ns = rd.integers("n_values");
    for (const int n : ns) {
      if (n < 1) throw ValidationError("spec /n_values: entries must be at least 1");
    }
    rd.finish();
    if (dry_run) return {};
    const ExtendedReal d = rel_entropy(target, gibbs_state(h, temperature));
    const double available = temperature * d.to_double();
    const auto pts = battery_convergence(target, h, ns, cfg, temperature);
    CsvWriter csv({"n_swaps", "mean", "stderr", "exact_mean", "available", "deficit"});
    for (const auto& pt : pts) {
      csv.add_row({std::to_string(pt.n_swaps), format_double(pt.mean),
                   format_double(pt.standard_error), format_double(pt.exact_mean),
                   format_double(available), format_double(available - pt.mean)});
    }
    return csv.str();
  }
  throw ValidationError("spec /kind: expected histogram or convergence");
}

}  // namespace qpe::cli
