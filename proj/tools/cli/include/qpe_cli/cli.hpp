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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qpe::cli {

std::string version();

/// Command-line overrides applied on top of a spec document.
struct RunOptions {
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  /// Model file path; replaces any source named in the spec.
  std::optional<std::string> model;
  /// Recorded in the metadata line only.
  std::string preset;
};

/// Commands that produce an artifact.
const std::vector<std::string>& artifact_commands();

/// Runs `command` on a JSON spec and returns the artifact: one '#' metadata
/// line (version, command, preset, seed, spec hash) followed by the CSV or
/// JSON body. Throws ValidationError / ComputationError.
std::string execute(const std::string& command, const std::string& spec_json,
                    const RunOptions& opts = {});

/// Parses and checks a spec without computing anything.
void check_spec(const std::string& command, const std::string& spec_json,
                const RunOptions& opts = {});

std::vector<std::string> preset_names();
/// Embedded spec text; ValidationError for unknown names.
const std::string& preset_spec(const std::string& name);
/// Command a preset is run with.
std::string preset_command(const std::string& name);

/// Full command line (without the program name). Returns the exit status:
/// 0 success, 1 validation failure, 2 runtime or computation failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::uint64_t fnv1a64(std::string_view data);

}  // namespace qpe::cli
