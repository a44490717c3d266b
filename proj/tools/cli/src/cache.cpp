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

#include "qpe_cli/cli.hpp"

#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace qpe::cli {

namespace {

std::optional<std::filesystem::path> cache_file(const std::string& key) {
  const char* dir = std::getenv("QPE_CACHE_DIR");
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  char name[40];
  std::snprintf(name, sizeof name, "v1-%016llx.json",
                static_cast<unsigned long long>(fnv1a64(key)));
  return std::filesystem::path(dir) / name;
}

}  // namespace

std::optional<std::vector<double>> cache_load(const std::string& key) {
  const auto file = cache_file(key);
  if (!file) return std::nullopt;
  std::ifstream in(*file);
  if (!in) return std::nullopt;
  try {
    const nlohmann::json doc = nlohmann::json::parse(in);
    // Hash collisions fall through to a recomputation.
    if (doc.at("key").get<std::string>() != key) return std::nullopt;
    return doc.at("values").get<std::vector<double>>();
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

void cache_store(const std::string& key, const std::vector<double>& values) {
  const auto file = cache_file(key);
  if (!file) return;
  std::error_code ec;
  std::filesystem::create_directories(file->parent_path(), ec);
  if (ec) return;
  std::ostringstream tid;
  tid << std::this_thread::get_id();
  const std::filesystem::path tmp = file->string() + ".tmp" + tid.str();
  {
    std::ofstream out(tmp);
    if (!out) return;
    out << nlohmann::json{{"key", key}, {"values", values}}.dump();
    if (!out) return;
  }
  std::filesystem::rename(tmp, *file, ec);
  if (ec) std::filesystem::remove(tmp, ec);
}

}  // namespace qpe::cli
