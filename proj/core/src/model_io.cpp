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

#include "qpe/model_io.hpp"

#include "qpe/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace qpe {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& pointer, const std::string& what) {
  throw ValidationError("model " + (pointer.empty() ? std::string("/") : pointer) + ": " + what);
}

std::string escape_pointer(const std::string& key) {
  std::string out;
  for (const char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

const json& require(const json& obj, const std::string& key, const std::string& pointer) {
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(pointer + "/" + escape_pointer(key), "missing required field");
  return *it;
}

std::vector<std::string> read_labels(const json& j, const std::string& pointer) {
  if (!j.is_array()) schema_error(pointer, "expected an array of labels");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].is_string()) {
      out.push_back(j[i].get<std::string>());
    } else if (j[i].is_number_integer()) {
      out.push_back(std::to_string(j[i].get<long long>()));
    } else {
      schema_error(pointer + "/" + std::to_string(i), "label must be a string or integer");
    }
  }
  return out;
}

double read_real(const json& j, const std::string& pointer) {
  if (!j.is_number()) schema_error(pointer, "expected a number");
  return j.get<double>();
}

Complex read_complex(const json& j, const std::string& pointer) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  schema_error(pointer, "expected a number or a [re, im] pair");
}

template <typename Matrix, typename Reader>
Matrix read_matrix(const json& j, const std::string& pointer, Reader reader) {
  if (!j.is_array() || j.empty()) schema_error(pointer, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array()) schema_error(pointer + "/0", "expected a row array");
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string row_ptr = pointer + "/" + std::to_string(i);
    if (!j[i].is_array()) schema_error(row_ptr, "expected a row array");
    if (j[i].size() != cols) {
      schema_error(row_ptr, "row has " + std::to_string(j[i].size()) + " entries, expected " +
                                std::to_string(cols));
    }
    for (std::size_t k = 0; k < cols; ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          reader(j[i][k], row_ptr + "/" + std::to_string(k));
    }
  }
  return m;
}

void line_column(const std::string& text, std::size_t byte, std::size_t& line, std::size_t& col) {
  line = 1;
  col = 1;
  const std::size_t end = std::min(byte, text.size());
  for (std::size_t i = 0; i + 1 < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
}

json complex_to_json(Complex c) { return json::array({c.real(), c.imag()}); }

}  // namespace

SourceDefinition parse_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 0;
    std::size_t col = 0;
    line_column(text, e.byte, line, col);
    throw ValidationError("model syntax error at line " + std::to_string(line) + ", column " +
                          std::to_string(col) + ": " + e.what());
  }
  if (!doc.is_object()) schema_error("", "top level must be an object");

  SourceDefinition def;
  if (const auto it = doc.find("name"); it != doc.end()) {
    if (!it->is_string()) schema_error("/name", "expected a string");
    def.name = it->get<std::string>();
  }
  if (const auto it = doc.find("energy_unit"); it != doc.end()) {
    if (!it->is_string() || it->get<std::string>() != "kBT") {
      schema_error("/energy_unit", "only \"kBT\" is supported");
    }
  }
  def.states = read_labels(require(doc, "states", ""), "/states");
  def.alphabet = read_labels(require(doc, "alphabet", ""), "/alphabet");

  const json& transitions = require(doc, "transitions", "");
  if (!transitions.is_object()) schema_error("/transitions", "expected an object keyed by symbol");
  const json& outputs = require(doc, "outputs", "");
  if (!outputs.is_object()) schema_error("/outputs", "expected an object keyed by symbol");
  for (const auto& sym : def.alphabet) {
    const std::string tp = "/transitions/" + escape_pointer(sym);
    const auto t = transitions.find(sym);
    if (t == transitions.end()) schema_error(tp, "missing transition matrix for symbol");
    def.transitions.push_back(read_matrix<RMatrix>(*t, tp, read_real));
    const std::string op = "/outputs/" + escape_pointer(sym);
    const auto o = outputs.find(sym);
    if (o == outputs.end()) schema_error(op, "missing output matrix for symbol");
    def.outputs.push_back(read_matrix<CMatrix>(*o, op, read_complex));
  }
  for (const auto& [key, value] : transitions.items()) {
    (void)value;
    if (std::find(def.alphabet.begin(), def.alphabet.end(), key) == def.alphabet.end()) {
      schema_error("/transitions/" + escape_pointer(key), "symbol not in alphabet");
    }
  }
  for (const auto& [key, value] : outputs.items()) {
    (void)value;
    if (std::find(def.alphabet.begin(), def.alphabet.end(), key) == def.alphabet.end()) {
      schema_error("/outputs/" + escape_pointer(key), "symbol not in alphabet");
    }
  }
  def.hamiltonian = read_matrix<CMatrix>(require(doc, "hamiltonian", ""), "/hamiltonian",
                                         read_complex);
  if (const auto it = doc.find("initial_belief"); it != doc.end()) {
    if (!it->is_array()) schema_error("/initial_belief", "expected an array of probabilities");
    RVector b(static_cast<Eigen::Index>(it->size()));
    for (std::size_t i = 0; i < it->size(); ++i) {
      b(static_cast<Eigen::Index>(i)) = read_real((*it)[i], "/initial_belief/" + std::to_string(i));
    }
    def.initial_belief = b;
  }

  const ValidationReport rep = validate(def);
  if (!rep.ok()) throw ValidationError("model invalid: " + rep.summary());
  return def;
}

SourceDefinition load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_model(buf.str());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string write_model(const SourceDefinition& def) {
  json doc = json::object();
  if (!def.name.empty()) doc["name"] = def.name;
  doc["states"] = def.states;
  doc["alphabet"] = def.alphabet;
  json transitions = json::object();
  json outputs = json::object();
  for (std::size_t x = 0; x < def.alphabet.size(); ++x) {
    json t = json::array();
    const RMatrix& tm = def.transitions.at(x);
    for (Eigen::Index i = 0; i < tm.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < tm.cols(); ++j) row.push_back(tm(i, j));
      t.push_back(row);
    }
    transitions[def.alphabet[x]] = t;
    json o = json::array();
    const CMatrix& om = def.outputs.at(x);
    for (Eigen::Index i = 0; i < om.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < om.cols(); ++j) row.push_back(complex_to_json(om(i, j)));
      o.push_back(row);
    }
    outputs[def.alphabet[x]] = o;
  }
  doc["transitions"] = transitions;
  doc["outputs"] = outputs;
  json h = json::array();
  for (Eigen::Index i = 0; i < def.hamiltonian.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < def.hamiltonian.cols(); ++j) {
      row.push_back(complex_to_json(def.hamiltonian(i, j)));
    }
    h.push_back(row);
  }
  doc["hamiltonian"] = h;
  doc["energy_unit"] = "kBT";
  if (def.initial_belief) {
    json b = json::array();
    for (Eigen::Index i = 0; i < def.initial_belief->size(); ++i) b.push_back((*def.initial_belief)(i));
    doc["initial_belief"] = b;
  }
  return doc.dump(2) + "\n";
}

}  // namespace qpe
