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

#include "spec_util.hpp"

#include "qpe/errors.hpp"
#include "qpe/model_io.hpp"

#include <cmath>
#include <limits>

namespace qpe::cli {

namespace {

[[noreturn]] void fail(const std::string& pointer, const std::string& message) {
  throw ValidationError("spec " + (pointer.empty() ? std::string("/") : pointer) + ": " + message);
}

}  // namespace

SpecReader::SpecReader(const json& object, std::string pointer)
    : obj_(&object), path_(std::move(pointer)) {
  if (!object.is_object()) fail(path_, "expected an object");
}

bool SpecReader::has(const std::string& key) const { return obj_->contains(key); }

const json& SpecReader::at(const std::string& key) {
  used_.insert(key);
  return obj_->at(key);
}

const json& SpecReader::raw(const std::string& key) {
  if (!has(key)) fail(pointer(key), "missing");
  return at(key);
}

double SpecReader::number(const std::string& key, std::optional<double> fallback) {
  if (!has(key)) {
    if (!fallback) fail(pointer(key), "missing");
    return *fallback;
  }
  const json& v = at(key);
  if (!v.is_number()) fail(pointer(key), "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(pointer(key), "must be finite");
  return d;
}

int SpecReader::integer(const std::string& key, std::optional<int> fallback) {
  if (!has(key)) {
    if (!fallback) fail(pointer(key), "missing");
    return *fallback;
  }
  const json& v = at(key);
  if (!v.is_number_integer()) fail(pointer(key), "expected an integer");
  const auto i = v.get<std::int64_t>();
  if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max()) {
    fail(pointer(key), "out of range");
  }
  return static_cast<int>(i);
}

std::optional<std::uint64_t> SpecReader::seed() {
  if (!has("seed")) return std::nullopt;
  const json& v = at("seed");
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    fail(pointer("seed"), "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string SpecReader::string(const std::string& key, std::optional<std::string> fallback) {
  if (!has(key)) {
    if (!fallback) fail(pointer(key), "missing");
    return *fallback;
  }
  const json& v = at(key);
  if (!v.is_string()) fail(pointer(key), "expected a string");
  return v.get<std::string>();
}

std::vector<std::string> SpecReader::strings(const std::string& key,
                                             std::optional<std::vector<std::string>> fallback) {
  if (!has(key)) {
    if (!fallback) fail(pointer(key), "missing");
    return *fallback;
  }
  const json& v = at(key);
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array() || v.empty()) fail(pointer(key), "expected a non-empty array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) fail(pointer(key) + "/" + std::to_string(i), "expected a string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

std::vector<double> SpecReader::grid(const std::string& key,
                                     std::optional<std::vector<double>> fallback) {
  if (!has(key)) {
    if (!fallback) fail(pointer(key), "missing");
    return *fallback;
  }
  const json& v = at(key);
  const std::string ptr = pointer(key);
  std::vector<double> out;
  if (v.is_number()) {
    out.push_back(v.get<double>());
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(ptr + "/" + std::to_string(i), "expected a number");
      out.push_back(v[i].get<double>());
    }
  } else if (v.is_object()) {
    SpecReader g(v, ptr);
    const double start = g.number("start");
    const double stop = g.number("stop");
    const int count = g.integer("count");
    g.finish();
    if (count < 1) fail(ptr + "/count", "must be at least 1");
    for (int i = 0; i < count; ++i) {
      out.push_back(count == 1 ? start : start + (stop - start) * i / (count - 1));
    }
  } else {
    fail(ptr, "expected a number, an array or {start, stop, count}");
  }
  if (out.empty()) fail(ptr, "grid is empty");
  for (const double d : out) {
    if (!std::isfinite(d)) fail(ptr, "grid values must be finite");
  }
  return out;
}

std::vector<int> SpecReader::integers(const std::string& key) {
  const json& v = raw(key);
  if (!v.is_array() || v.empty()) fail(pointer(key), "expected a non-empty array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer()) fail(pointer(key) + "/" + std::to_string(i), "expected an integer");
    out.push_back(v[i].get<int>());
  }
  return out;
}

SpecReader SpecReader::object(const std::string& key) { return SpecReader(raw(key), pointer(key)); }

void SpecReader::finish() const {
  for (const auto& [k, v] : obj_->items()) {
    if (!used_.count(k)) fail(path_ + "/" + k, "unknown key");
  }
}

Family parse_family(const std::string& name, const std::string& pointer) {
  if (name == "perturbed_coin") return Family::perturbed_coin;
  if (name == "golden_mean") return Family::golden_mean;
  fail(pointer, "unknown family '" + name + "' (perturbed_coin, golden_mean)");
}

std::string to_string(Family f) {
  return f == Family::perturbed_coin ? "perturbed_coin" : "golden_mean";
}

bool family_uses_p(Family f) { return f == Family::perturbed_coin; }

HmmSource make_source(Family f, double p, double r, double energy_gap) {
  return f == Family::perturbed_coin ? builtin_perturbed_coin(p, r, energy_gap)
                                     : builtin_golden_mean(r, energy_gap);
}

HmmSource SourceChoice::build() const {
  if (model) return HmmSource::from_definition(*model);
  return make_source(family, p, r, energy_gap);
}

std::string SourceChoice::label() const {
  if (model) return model->name.empty() ? std::string("model") : model->name;
  return to_string(family);
}

double SourceChoice::p_column() const {
  return model || !family_uses_p(family) ? std::numeric_limits<double>::quiet_NaN() : p;
}

double SourceChoice::r_column() const {
  return model ? std::numeric_limits<double>::quiet_NaN() : r;
}

SourceChoice read_source(SpecReader& reader) {
  SourceChoice s;
  if (reader.has("model")) {
    if (reader.has("family")) fail(reader.pointer("family"), "give either a model or a family");
    s.model = load_model(reader.string("model"));
    return s;
  }
  s.family = parse_family(reader.string("family", "perturbed_coin"), reader.pointer("family"));
  if (family_uses_p(s.family)) s.p = reader.number("p");
  s.r = reader.number("r");
  s.energy_gap = reader.number("energy_gap", 1.0);
  return s;
}

StrategyKind parse_policy(const std::string& name, const std::string& pointer) {
  const auto k = parse_strategy(name);
  if (!k) fail(pointer, "unknown policy '" + name + "'");
  return *k;
}

DensityOperator read_state(const json& j, const std::string& pointer) {
  if (!j.is_object() || j.size() != 1) fail(pointer, "expected {\"pure\": [...]} or {\"matrix\": [[...]]}");
  if (j.contains("pure")) {
    const json& a = j["pure"];
    if (!a.is_array() || a.empty()) fail(pointer + "/pure", "expected an array of amplitudes");
    CVector psi(static_cast<int>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i].is_number()) fail(pointer + "/pure/" + std::to_string(i), "expected a number");
      psi(static_cast<int>(i)) = a[i].get<double>();
    }
    if (psi.norm() == 0.0) fail(pointer + "/pure", "zero vector");
    return DensityOperator::pure(psi / psi.norm());
  }
  if (j.contains("matrix")) {
    const json& m = j["matrix"];
    if (!m.is_array() || m.empty()) fail(pointer + "/matrix", "expected a square array");
    const auto n = static_cast<int>(m.size());
    CMatrix out(n, n);
    for (int r = 0; r < n; ++r) {
      const json& row = m[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<int>(row.size()) != n) {
        fail(pointer + "/matrix/" + std::to_string(r), "row length differs from the row count");
      }
      for (int c = 0; c < n; ++c) {
        const json& v = row[static_cast<std::size_t>(c)];
        if (!v.is_number()) {
          fail(pointer + "/matrix/" + std::to_string(r) + "/" + std::to_string(c), "expected a number");
        }
        out(r, c) = v.get<double>();
      }
    }
    try {
      return DensityOperator(out);
    } catch (const ValidationError& e) {
      fail(pointer + "/matrix", e.what());
    }
  }
  fail(pointer, "expected {\"pure\": [...]} or {\"matrix\": [[...]]}");
}

std::uint64_t require_seed(const std::optional<std::uint64_t>& seed, const std::string& what) {
  if (!seed) throw ValidationError("spec /seed: required for " + what + " (set it or pass --seed)");
  return *seed;
}

std::string sanitize_cell(std::string text) {
  for (char& c : text) {
    if (c == ',' || c == '\n' || c == '\r') c = c == ',' ? ';' : ' ';
  }
  return text;
}

}  // namespace qpe::cli
