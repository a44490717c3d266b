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

#include "qpe/extraction.hpp"
#include "qpe/source.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace qpe::cli {

using nlohmann::json;

/// Typed access to one JSON object. Every key read is remembered so that
/// finish() can reject unknown keys with their JSON pointer.
class SpecReader {
 public:
  SpecReader(const json& object, std::string pointer);

  bool has(const std::string& key) const;
  double number(const std::string& key, std::optional<double> fallback = std::nullopt);
  int integer(const std::string& key, std::optional<int> fallback = std::nullopt);
  std::optional<std::uint64_t> seed();
  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt);
  std::vector<std::string> strings(const std::string& key,
                                   std::optional<std::vector<std::string>> fallback = std::nullopt);
  /// Array of numbers or {"start", "stop", "count"}.
  std::vector<double> grid(const std::string& key,
                           std::optional<std::vector<double>> fallback = std::nullopt);
  std::vector<int> integers(const std::string& key);
  SpecReader object(const std::string& key);
  const json& raw(const std::string& key);
  std::string pointer(const std::string& key) const { return path_ + "/" + key; }
  void finish() const;

 private:
  const json& at(const std::string& key);

  const json* obj_;
  std::string path_;
  std::set<std::string> used_;
};

/// Parameterized builtin families.
enum class Family { perturbed_coin, golden_mean };
Family parse_family(const std::string& name, const std::string& pointer);
std::string to_string(Family f);
bool family_uses_p(Family f);
HmmSource make_source(Family f, double p, double r, double energy_gap);

/// A single source named in a spec: either a builtin family point or a
/// model file.
struct SourceChoice {
  std::optional<SourceDefinition> model;
  Family family = Family::perturbed_coin;
  double p = 0.5;
  double r = 0.5;
  double energy_gap = 1.0;

  HmmSource build() const;
  std::string label() const;
  double p_column() const;
  double r_column() const;
};

/// Reads "model" or "family"/"p"/"r"/"energy_gap".
SourceChoice read_source(SpecReader& reader);

StrategyKind parse_policy(const std::string& name, const std::string& pointer);

/// Density operator from {"pure": [...]} (real amplitudes, normalized here)
/// or {"matrix": [[...]]} (real entries).
DensityOperator read_state(const json& j, const std::string& pointer);

std::uint64_t require_seed(const std::optional<std::uint64_t>& seed, const std::string& what);

/// Cell text without separators or line breaks.
std::string sanitize_cell(std::string text);

}  // namespace qpe::cli
