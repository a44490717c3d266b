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

#include "qpe/metadynamics.hpp"

#include "json.hpp"

namespace qpe {

namespace {

nlohmann::json extended(const ExtendedReal& v) {
  if (v.is_finite()) return v.value();
  return v.to_string();
}

}  // namespace

std::string graph_to_json(const BeliefGraph& graph) {
  using nlohmann::json;
  json doc = json::object();
  doc["policy"] = to_string(graph.policy.kind);
  doc["root"] = graph.root;
  doc["closed"] = graph.closed;
  doc["dropped_mass"] = graph.dropped_mass;
  doc["truncation_log"] = graph.truncation_log;
  json nodes = json::array();
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const GraphNode& n = graph.nodes[i];
    json belief = json::array();
    for (int k = 0; k < n.belief.size(); ++k) belief.push_back(n.belief[k]);
    nodes.push_back({{"id", i},
                     {"belief", belief},
                     {"recurrent", n.recurrent},
                     {"class", n.recurrent_class},
                     {"offset_root", n.offset_root},
                     {"seeded", n.seeded},
                     {"work", extended(n.work)}});
  }
  doc["nodes"] = nodes;
  json edges = json::array();
  for (const GraphEdge& e : graph.edges) {
    edges.push_back({{"from", e.from},
                     {"to", e.to},
                     {"outcome", e.outcome},
                     {"work", extended(e.work)},
                     {"probability", e.probability},
                     {"quantized", e.quantized}});
  }
  doc["edges"] = edges;
  return doc.dump(2) + "\n";
}

}  // namespace qpe
