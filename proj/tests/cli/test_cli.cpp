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

#include "qpe/csv.hpp"

#include "json.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  Result r;
  r.code = qpe::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string asset(const std::string& name) { return std::string(QPE_ASSET_DIR) + "/models/" + name; }

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() /
                       ("qpe_cli_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path.string();
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  return json::parse(in);
}

// Parsed artifact: metadata line, header, rows. Every row must have the
// header's column count.
struct Table {
  std::string meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return static_cast<int>(i);
    }
    ADD_FAILURE() << "missing column " << name;
    return 0;
  }
  double num(std::size_t row, const std::string& name) const {
    return std::stod(rows[row][static_cast<std::size_t>(col(name))]);
  }
  const std::string& str(std::size_t row, const std::string& name) const {
    return rows[row][static_cast<std::size_t>(col(name))];
  }
};

Table parse_table(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  std::getline(in, t.meta);
  EXPECT_EQ(t.meta.rfind("# qpe ", 0), 0u) << t.meta;
  std::getline(in, line);
  t.columns = qpe::split_csv_line(line);
  while (std::getline(in, line)) {
    auto cells = qpe::split_csv_line(line);
    EXPECT_EQ(cells.size(), t.columns.size()) << line;
    t.rows.push_back(std::move(cells));
  }
  return t;
}

std::string body(const std::string& artifact) { return artifact.substr(artifact.find('\n') + 1); }

}  // namespace

TEST(CliValidate, BuiltinModelIsValid) {
  const Result r = cli({"validate", "--model", asset("perturbed_coin.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("valid model"), std::string::npos);
}

TEST(CliValidate, CorruptedRowSumsFail) {
  json doc = load_json(asset("perturbed_coin.json"));
  doc["transitions"]["0"][1][0] = 0.3;
  const std::string path = write_file(scratch_dir() / "bad_rows.json", doc.dump());
  const Result r = cli({"validate", "--model", path});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("row 1"), std::string::npos) << r.err;
}

TEST(CliValidate, MissingOutputNamesField) {
  json doc = load_json(asset("perturbed_coin.json"));
  doc["outputs"].erase("1");
  const std::string path = write_file(scratch_dir() / "missing_output.json", doc.dump());
  const Result r = cli({"validate", "--model", path});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("/outputs"), std::string::npos) << r.err;
}

TEST(CliValidate, EveryPresetValidates) {
  const auto names = qpe::cli::preset_names();
  for (const char* expected : {"fig3", "fig3c", "fig3d", "phase", "returnmap", "appG", "fig6",
                               "fig7", "fig8", "bounds"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), expected), names.end()) << expected;
  }
  for (const auto& name : names) {
    const Result r = cli({"validate", "--preset", name});
    EXPECT_EQ(r.code, 0) << name << ": " << r.err;
  }
}

TEST(CliValidate, BadInvocationsExitOne) {
  EXPECT_EQ(cli({"validate", "--preset", "no_such_preset"}).code, 1);
  EXPECT_EQ(cli({"validate"}).code, 1);
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  EXPECT_EQ(cli({"sweep", "--preset", "appG"}).code, 1);  // preset belongs to trace
  const fs::path dir = scratch_dir();
  const std::string spec = write_file(dir / "typo.json", R"({"p": [0.2], "r": [0.3], "polices": ["memoryless"]})");
  const Result typo = cli({"sweep", "--spec", spec});
  EXPECT_EQ(typo.code, 1);
  EXPECT_NE(typo.err.find("/polices"), std::string::npos) << typo.err;
  const std::string syntax = write_file(dir / "syntax.json", "{\n\"p\": [0.2,\n");
  EXPECT_EQ(cli({"sweep", "--spec", syntax}).code, 1);
  EXPECT_EQ(cli({"sweep", "--spec", spec, "--preset", "fig3"}).code, 1);
}

TEST(CliExitCodes, UnwritableOutputIsRuntimeFailure) {
  const fs::path dir = scratch_dir();
  const std::string blocker = write_file(dir / "file", "x");
  const Result r = cli({"returnmap", "--preset", "returnmap", "--out", blocker + "/sub/out.csv"});
  EXPECT_EQ(r.code, 2) << r.err;
}

TEST(CliSweep, RowCountSchemaAndApatheticZero) {
  const fs::path dir = scratch_dir();
  const std::string spec = write_file(dir / "sweep.json", R"({
    "command": "sweep", "p": [0.2, 0.35, 0.5, 0.7], "r": [0.3, 0.6, 0.9],
    "policies": ["memory_quantum", "memory_classical", "memoryless", "overcommit"]})");
  const Result r = cli({"sweep", "--spec", spec, "--jobs", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Table t = parse_table(r.out);
  EXPECT_EQ(t.columns.size(), 11u);
  ASSERT_EQ(t.rows.size(), 4u * 3u * 4u);
  // Rows come in grid order: p outer, r inner, policies in spec order.
  for (std::size_t i = 0; i + 3 < t.rows.size(); i += 4) {
    EXPECT_EQ(t.str(i, "policy"), "memory_quantum");
    EXPECT_EQ(t.str(i + 2, "policy"), "memoryless");
    EXPECT_EQ(t.str(i, "error"), "");
    if (t.str(i, "regime_flag") == "apathetic") {
      EXPECT_LT(std::abs(t.num(i, "work_rate") - t.num(i + 2, "work_rate")), 1e-9);
    }
  }
  // Same spec on one thread: identical bytes.
  EXPECT_EQ(cli({"sweep", "--spec", spec, "--jobs", "1"}).out, r.out);
}

TEST(CliSweep, FailingPointBecomesErrorRow) {
  const fs::path dir = scratch_dir();
  const std::string spec = write_file(dir / "edge.json",
                                      R"({"p": [0.0, 0.3], "r": [0.5], "policies": ["memoryless"]})");
  const Result r = cli({"sweep", "--spec", spec});
  ASSERT_EQ(r.code, 0) << r.err;
  const Table t = parse_table(r.out);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_NE(t.str(0, "error"), "");
  EXPECT_EQ(t.str(1, "error"), "");
}

TEST(CliSweep, MonteCarloNeedsSeedAndTracksAnalytic) {
  const fs::path dir = scratch_dir();
  const std::string spec = write_file(dir / "mc.json", R"({
    "p": [0.3, 0.8], "r": [0.5], "policies": ["memory_quantum", "memoryless"],
    "mode": "both", "monte_carlo": {"steps": 4000}})");
  EXPECT_EQ(cli({"sweep", "--spec", spec}).code, 1);
  const Result r = cli({"sweep", "--spec", spec, "--seed", "11"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Table t = parse_table(r.out);
  ASSERT_EQ(t.rows.size(), 8u);
  for (std::size_t i = 0; i < t.rows.size(); i += 2) {
    ASSERT_EQ(t.str(i, "mode"), "analytic");
    ASSERT_EQ(t.str(i + 1, "mode"), "monte_carlo");
    EXPECT_NEAR(t.num(i + 1, "work_rate"), t.num(i, "work_rate"), 3 * t.num(i + 1, "stderr"));
  }
  EXPECT_NE(t.meta.find("seed=11"), std::string::npos);
  const Result again = cli({"sweep", "--spec", spec, "--seed", "11"});
  EXPECT_EQ(again.out, r.out);
  EXPECT_NE(cli({"sweep", "--spec", spec, "--seed", "12"}).out, r.out);
}

TEST(CliPhase, SortedAndNoBoundaryNearOne) {
  const fs::path dir = scratch_dir();
  const std::string spec = write_file(dir / "phase.json", R"({"r": [0.5, 0.1, 1.0, 0.25]})");
  const Result r = cli({"phase", "--spec", spec});
  ASSERT_EQ(r.code, 0) << r.err;
  const Table t = parse_table(r.out);
  ASSERT_EQ(t.rows.size(), 4u);
  for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_LT(t.num(i - 1, "r"), t.num(i, "r"));
  EXPECT_EQ(t.str(3, "flag"), "no_boundary");
  EXPECT_TRUE(std::isnan(t.num(3, "p_lower")));
  EXPECT_EQ(t.str(0, "flag"), "ok");
  // Boundaries are symmetric about p = 1/2.
  EXPECT_NEAR(t.num(0, "p_lower") + t.num(0, "p_upper"), 1.0, 1e-7);
}

TEST(CliReturnMap, SchemaAndReferenceLines) {
  const Result r = cli({"returnmap", "--preset", "returnmap"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Table t = parse_table(r.out);
  const std::vector<std::string> cols{"eps", "branch0_image", "branch0_probability", "branch1_image",
                                      "branch1_probability", "identity", "swap"};
  EXPECT_EQ(t.columns, cols);
  ASSERT_EQ(t.rows.size(), 401u);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    EXPECT_EQ(t.num(i, "identity"), t.num(i, "eps"));
    EXPECT_EQ(t.num(i, "swap"), -t.num(i, "eps"));
    EXPECT_NEAR(t.num(i, "branch0_probability") + t.num(i, "branch1_probability"), 1.0, 1e-12);
  }
}

TEST(CliTrace, SeedControlsOutput) {
  const fs::path dir = scratch_dir();
  const std::string spec = write_file(dir / "trace.json", R"({
    "family": "perturbed_coin", "p": 0.1, "r": 0.1, "steps": 300, "n_swaps": 50})");
  EXPECT_EQ(cli({"trace", "--spec", spec}).code, 1);  // seed missing
  const Result a = cli({"trace", "--spec", spec, "--seed", "5"});
  ASSERT_EQ(a.code, 0) << a.err;
  const Table t = parse_table(a.out);
  EXPECT_EQ(t.rows.size(), 300u);
  EXPECT_EQ(t.str(0, "target_kind"), "offset");
  EXPECT_EQ(cli({"trace", "--spec", spec, "--seed", "5"}).out, a.out);
  EXPECT_NE(body(cli({"trace", "--spec", spec, "--seed", "6"}).out), body(a.out));
}

TEST(CliTrace, ModelFlagReplacesSource) {
  const Result r = cli({"trace", "--preset", "appG", "--model", asset("golden_mean_2_1.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Table t = parse_table(r.out);
  EXPECT_EQ(t.columns[3], "belief_2");
  EXPECT_EQ(t.rows.size(), 5000u);
}

TEST(CliBounds, CacheLeavesBytesUnchanged) {
  const fs::path dir = scratch_dir();
  const fs::path cache = dir / "cache";
  const std::string spec = write_file(dir / "bounds.json", R"({"p": [0.2], "r": [0.4], "max_length": 6})");
  const Result fresh = cli({"bounds", "--spec", spec});
  ASSERT_EQ(fresh.code, 0) << fresh.err;
  ::setenv("QPE_CACHE_DIR", cache.c_str(), 1);
  const Result fill = cli({"bounds", "--spec", spec});
  const Result hit = cli({"bounds", "--spec", spec});
  ::unsetenv("QPE_CACHE_DIR");
  EXPECT_EQ(fill.out, fresh.out);
  EXPECT_EQ(hit.out, fresh.out);
  EXPECT_FALSE(fs::is_empty(cache));
  const Table t = parse_table(fresh.out);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_LE(t.num(0, "w_ideal_lower"), t.num(0, "w_ideal_upper"));
}

TEST(CliProtocol, HistogramMassesNormalized) {
  const fs::path dir = scratch_dir();
  const std::string spec = write_file(dir / "hist.json", R"({
    "kind": "histogram", "target": {"matrix": [[0.9, 0.0], [0.0, 0.1]]},
    "sigmas": [{"label": "a", "state": {"pure": [1, 0]}}, {"label": "b", "state": {"pure": [1, 1]}}],
    "n_swaps": 10, "trajectories": 2000, "seed": 3})");
  const Result r = cli({"protocol", "--spec", spec, "--jobs", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Table t = parse_table(r.out);
  std::map<std::string, double> total;
  for (std::size_t i = 0; i < t.rows.size(); ++i) total[t.str(i, "sigma")] += t.num(i, "mass");
  ASSERT_EQ(total.size(), 2u);
  for (const auto& [label, m] : total) EXPECT_NEAR(m, 1.0, 1e-9) << label;
  EXPECT_EQ(cli({"protocol", "--spec", spec, "--jobs", "1"}).out, r.out);
}

TEST(CliOutput, OutFlagWritesFileWithHeader) {
  const fs::path out = scratch_dir() / "nested" / "map.csv";
  ASSERT_EQ(cli({"returnmap", "--preset", "returnmap", "--out", out.string()}).code, 0);
  std::ifstream in(out);
  std::string first;
  std::getline(in, first);
  EXPECT_NE(first.find("preset=returnmap"), std::string::npos);
  EXPECT_NE(first.find("spec_fnv1a64="), std::string::npos);
}
