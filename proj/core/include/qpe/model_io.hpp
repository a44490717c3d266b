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

#include "qpe/source.hpp"

#include <filesystem>
#include <string>

namespace qpe {

/// Parses a model document. Syntax errors report line and column; schema
/// errors report the JSON pointer of the offending field. Invariant
/// violations of the resulting source are reported as well, so a returned
/// definition always validates.
SourceDefinition parse_model(const std::string& text);
SourceDefinition load_model(const std::filesystem::path& path);

/// Serializes a definition; complex entries are written as [re, im].
std::string write_model(const SourceDefinition& def);

}  // namespace qpe
