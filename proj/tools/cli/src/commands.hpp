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

#include "json.hpp"

#include <string>

namespace qpe::cli {

// Each command parses and validates its whole spec first; with dry_run set
// it stops there and returns an empty body.
std::string cmd_sweep(const nlohmann::json& spec, int jobs, bool dry_run);
std::string cmd_phase(const nlohmann::json& spec, int jobs, bool dry_run);
std::string cmd_returnmap(const nlohmann::json& spec, int jobs, bool dry_run);
std::string cmd_trace(const nlohmann::json& spec, int jobs, bool dry_run);
std::string cmd_bounds(const nlohmann::json& spec, int jobs, bool dry_run);
std::string cmd_protocol(const nlohmann::json& spec, int jobs, bool dry_run);

}  // namespace qpe::cli
