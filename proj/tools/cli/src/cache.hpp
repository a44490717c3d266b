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

#include <optional>
#include <string>
#include <vector>

namespace qpe::cli {

/// On-disk memo of numeric vectors under $QPE_CACHE_DIR. Without the
/// variable every call is a miss and nothing is written. Stored values
/// round-trip exactly, so cached and fresh runs emit identical bytes.
std::optional<std::vector<double>> cache_load(const std::string& key);
void cache_store(const std::string& key, const std::vector<double>& values);

}  // namespace qpe::cli
