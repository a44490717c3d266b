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

#include "qpe_cli/cli.hpp"

#include "qpe/errors.hpp"

#include "json.hpp"

#include <map>

namespace qpe::cli {

namespace {

const std::map<std::string, std::string>& presets() {
  static const std::map<std::string, std::string> table = {
      {"fig3", R"({
  "command": "sweep",
  "family": "perturbed_coin",
  "p": {"start": 0.02, "stop": 0.98, "count": 21},
  "r": {"start": 0.0, "stop": 1.0, "count": 21},
  "policies": ["memory_quantum", "memory_classical", "memoryless", "overcommit"],
  "mode": "analytic"
})"},
      {"fig3c", R"({
  "command": "sweep",
  "family": "perturbed_coin",
  "p": {"start": 0.01, "stop": 0.99, "count": 400},
  "r": [0.1],
  "policies": ["memory_quantum", "memory_classical", "memoryless", "overcommit"],
  "mode": "analytic"
})"},
      {"fig3d", R"({
  "command": "sweep",
  "family": "perturbed_coin",
  "p": {"start": 0.01, "stop": 0.99, "count": 400},
  "r": [0.3],
  "policies": ["memory_quantum", "memory_classical", "memoryless", "overcommit"],
  "mode": "analytic"
})"},
      {"fig3_markers", R"({
  "command": "sweep",
  "family": "perturbed_coin",
  "p": {"start": 0.1, "stop": 0.9, "count": 9},
  "r": [0.1, 0.3],
  "policies": ["memory_quantum", "memory_classical", "memoryless", "overcommit"],
  "mode": "both",
  "monte_carlo": {"steps": 5000, "engine": "ideal"},
  "seed": 1
})"},
      {"phase", R"({
  "command": "phase",
  "family": "perturbed_coin",
  "r": {"start": 0.01, "stop": 0.99, "count": 99},
  "policy": "memory_quantum"
})"},
      {"returnmap", R"({
  "command": "returnmap",
  "family": "perturbed_coin",
  "p": 0.1,
  "r": 0.1,
  "policy": "memory_quantum",
  "grid_size": 401
})"},
      {"appG", R"({
  "command": "trace",
  "family": "perturbed_coin",
  "p": 0.1,
  "r": 0.1,
  "policy": "memory_quantum",
  "steps": 5000,
  "mode": "finite_n",
  "n_swaps": 200,
  "seed": 1
})"},
      {"fig6", R"({
  "command": "protocol",
  "kind": "convergence",
  "target": {"matrix": [[0.85, 0.1], [0.1, 0.15]]},
  "n_values": [10, 20, 50, 100, 200, 500, 1000, 2000],
  "trajectories": 20000,
  "seed": 1
})"},
      {"fig7", R"({
  "command": "protocol",
  "kind": "histogram",
  "target": {"matrix": [[0.999, 0.0], [0.0, 0.001]]},
  "sigmas": [
    {"label": "ket0", "state": {"pure": [1.0, 0.0]}},
    {"label": "psi", "state": {"pure": [0.8944271909999159, 0.4472135954999579]}}
  ],
  "n_swaps": 22,
  "bin_width": 0.1,
  "trajectories": 100000,
  "seed": 1
})"},
      {"fig8", R"({
  "command": "sweep",
  "families": ["perturbed_coin", "golden_mean"],
  "p": [0.2],
  "r": {"start": 0.05, "stop": 0.95, "count": 19},
  "policies": ["memory_quantum", "memoryless"],
  "mode": "both",
  "monte_carlo": {"steps": 20000, "engine": "ideal"},
  "seed": 1
})"},
      {"bounds", R"({
  "command": "bounds",
  "families": ["perturbed_coin", "golden_mean"],
  "p": [0.1, 0.3, 0.5],
  "r": [0.1, 0.5, 0.9],
  "max_length": 8
})"},
  };
  return table;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, text] : presets()) out.push_back(name);
  return out;
}

const std::string& preset_spec(const std::string& name) {
  const auto it = presets().find(name);
  if (it == presets().end()) throw ValidationError("unknown preset '" + name + "'");
  return it->second;
}

std::string preset_command(const std::string& name) {
  return nlohmann::json::parse(preset_spec(name)).at("command").get<std::string>();
}

}  // namespace qpe::cli
