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

#include "commands.hpp"

#include "qpe/errors.hpp"
#include "qpe/model_io.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

namespace qpe::cli {

namespace {

using nlohmann::json;
using Handler = std::function<std::string(const json&, int, bool)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table = {
      {"sweep", cmd_sweep},   {"phase", cmd_phase},   {"returnmap", cmd_returnmap},
      {"trace", cmd_trace},   {"bounds", cmd_bounds}, {"protocol", cmd_protocol},
  };
  return table;
}

std::string read_file(const std::string& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + what + " " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_spec(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  try {
    json j = json::parse(text);
    if (!j.is_object()) throw ValidationError("spec: top level must be an object");
    return j;
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) line += text[i] == '\n';
    throw ValidationError("spec syntax error near line " + std::to_string(line) + ": " + e.what());
  }
}

json apply_overrides(json spec, const RunOptions& opts) {
  if (opts.seed) spec["seed"] = *opts.seed;
  if (opts.model) {
    for (const char* k : {"family", "families", "p", "r", "energy_gap"}) spec.erase(k);
    spec["model"] = *opts.model;
  }
  return spec;
}

const Handler& handler_for(const std::string& command) {
  const auto it = handlers().find(command);
  if (it == handlers().end()) throw ValidationError("unknown command '" + command + "'");
  return it->second;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string version() { return "1.0.0"; }

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const std::vector<std::string>& artifact_commands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, h] : handlers()) out.push_back(name);
    return out;
  }();
  return names;
}

std::string execute(const std::string& command, const std::string& spec_json,
                    const RunOptions& opts) {
  const Handler& h = handler_for(command);
  const json spec = apply_overrides(parse_spec(spec_json), opts);
  const std::string body = h(spec, opts.jobs, false);

  std::string hashed = spec.dump();
  if (spec.contains("model") && spec["model"].is_string()) {
    hashed += '\n' + read_file(spec["model"].get<std::string>(), "model file");
  }
  std::string seed = "none";
  if (spec.contains("seed")) seed = spec["seed"].dump();
  return "# qpe " + version() + " command=" + command +
         " preset=" + (opts.preset.empty() ? std::string("none") : opts.preset) +
         " seed=" + seed + " spec_fnv1a64=" + hex64(fnv1a64(hashed)) + "\n" + body;
}

void check_spec(const std::string& command, const std::string& spec_json, const RunOptions& opts) {
  const Handler& h = handler_for(command);
  h(apply_overrides(parse_spec(spec_json), opts), opts.jobs, true);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Predictive quantum work-extraction engine simulator", "qpe"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  struct Flags {
    std::string model, spec, out, preset;
    std::uint64_t seed = 0;
    int jobs = 1;
  } flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--model", flags.model, "Model JSON file")->check(CLI::ExistingFile);
    sub->add_option("--spec", flags.spec, "Experiment spec JSON file")->check(CLI::ExistingFile);
    sub->add_option("--preset", flags.preset, "Embedded experiment spec");
    sub->add_option("--out", flags.out, "Output file (default: stdout)");
    sub->add_option("--seed", flags.seed, "Seed; overrides the spec");
    sub->add_option("--jobs", flags.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };

  std::map<std::string, CLI::App*> subs;
  subs["validate"] = app.add_subcommand("validate", "Check a model file, spec or preset");
  subs["sweep"] = app.add_subcommand("sweep", "Work rates over a (p, r) grid");
  subs["phase"] = app.add_subcommand("phase", "Phase-boundary table over r");
  subs["returnmap"] = app.add_subcommand("returnmap", "Belief update branches of a two-state source");
  subs["trace"] = app.add_subcommand("trace", "Closed-loop engine trajectory");
  subs["bounds"] = app.add_subcommand("bounds", "Entropy profile and ideal work bracket");
  subs["protocol"] = app.add_subcommand("protocol", "Finite-N protocol histograms and convergence");
  for (auto& [name, sub] : subs) add_common(sub);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  std::string command;
  for (auto& [name, sub] : subs) {
    if (sub->parsed()) command = name;
  }
  const CLI::App* sub = subs[command];

  try {
    RunOptions opts;
    opts.jobs = flags.jobs;
    if (sub->count("--seed") > 0) opts.seed = flags.seed;
    if (!flags.model.empty()) opts.model = flags.model;
    if (!flags.spec.empty() && !flags.preset.empty()) {
      throw ValidationError("give either --spec or --preset");
    }
    std::string spec_text;
    if (!flags.preset.empty()) {
      spec_text = preset_spec(flags.preset);
      opts.preset = flags.preset;
    } else if (!flags.spec.empty()) {
      spec_text = read_file(flags.spec, "spec file");
    }

    std::string artifact;
    if (command == "validate") {
      std::ostringstream report;
      if (opts.model) {
        const HmmSource src = HmmSource::from_definition(load_model(*opts.model));
        report << "valid model " << *opts.model << ": states=" << src.num_states()
               << " alphabet=" << src.alphabet_size() << " dim=" << src.dim() << "\n";
      }
      if (!spec_text.empty()) {
        const json spec = parse_spec(spec_text);
        if (!spec.contains("command") || !spec["command"].is_string()) {
          throw ValidationError("spec /command: needed to validate a spec");
        }
        const std::string target = spec["command"].get<std::string>();
        check_spec(target, spec_text, opts);
        report << "valid " << (opts.preset.empty() ? "spec " + flags.spec : "preset " + opts.preset)
               << " for command " << target << "\n";
      }
      if (!opts.model && spec_text.empty()) {
        throw ValidationError("validate needs --model, --spec or --preset");
      }
      artifact = report.str();
    } else {
      artifact = execute(command, spec_text, opts);
    }

    if (flags.out.empty()) {
      out << artifact;
    } else {
      const std::filesystem::path path(flags.out);
      if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
      std::ofstream file(path, std::ios::binary);
      if (!(file << artifact)) throw std::runtime_error("cannot write " + flags.out);
    }
    return 0;
  } catch (const ValidationError& e) {
    err << "qpe " << command << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "qpe " << command << ": " << e.what() << "\n";
    return 2;
  }
}

}  // namespace qpe::cli
