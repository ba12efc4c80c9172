// Copyright 2026 The DCS Authors.
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

#include "dcs/serialization.h"

#include <fstream>
#include <sstream>

namespace dcs {

using nlohmann::json;

json to_json(const MetaGraph& meta) {
  json stages = json::array();
  for (const StageConfig& s : meta.stages) {
    stages.push_back({{"base_channels", s.base_channels},
                      {"repeats", s.repeats},
                      {"height", s.height},
                      {"width", s.width}});
  }
  json cells = json::array();
  for (const CellGraph& c : meta.cells) {
    json ops = json::array();
    for (OperatorKind op : c.ops()) ops.push_back(std::string(to_string(op)));
    json edges = json::array();
    for (const Edge& e : c.edges()) edges.push_back(json::array({e.from, e.to}));
    cells.push_back({{"num_vertices", c.num_vertices()},
                     {"ops", std::move(ops)},
                     {"edges", std::move(edges)}});
  }
  return {{"version", kMetaGraphDocumentVersion},
          {"stages", std::move(stages)},
          {"cells", std::move(cells)}};
}

namespace {

const json& field(const json& obj, const char* name) {
  if (!obj.is_object() || !obj.contains(name)) {
    throw SchemaError(std::string("missing field '") + name + "'");
  }
  return obj.at(name);
}

int int_field(const json& obj, const char* name) {
  const json& v = field(obj, name);
  if (!v.is_number_integer()) {
    throw SchemaError(std::string("field '") + name + "' must be an integer");
  }
  return v.get<int>();
}

}  // namespace

MetaGraph metagraph_from_json(const json& doc) {
  if (int_field(doc, "version") != kMetaGraphDocumentVersion) {
    throw SchemaError("unsupported meta-graph document version");
  }
  const json& stages = field(doc, "stages");
  const json& cells = field(doc, "cells");
  if (!stages.is_array() || !cells.is_array()) {
    throw SchemaError("'stages' and 'cells' must be arrays");
  }
  if (stages.size() != cells.size() || stages.empty()) {
    throw SchemaError("'stages' and 'cells' must be non-empty and equally long");
  }
  MetaGraph meta;
  for (const json& s : stages) {
    StageConfig stage{int_field(s, "base_channels"), int_field(s, "repeats"),
                      int_field(s, "height"), int_field(s, "width")};
    if (stage.base_channels < 1 || stage.repeats < 1 || stage.height < 1 ||
        stage.width < 1) {
      throw SchemaError("stage fields must be >= 1");
    }
    meta.stages.push_back(stage);
  }
  for (const json& c : cells) {
    const int n = int_field(c, "num_vertices");
    const json& ops_doc = field(c, "ops");
    const json& edges_doc = field(c, "edges");
    if (!ops_doc.is_array() || !edges_doc.is_array()) {
      throw SchemaError("'ops' and 'edges' must be arrays");
    }
    std::vector<OperatorKind> ops;
    for (const json& op : ops_doc) {
      if (!op.is_string()) throw SchemaError("operator names must be strings");
      ops.push_back(parse_operator(op.get<std::string>()));
    }
    std::vector<Edge> edges;
    for (const json& e : edges_doc) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
          !e[1].is_number_integer()) {
        throw SchemaError("edges must be [u, v] integer pairs");
      }
      edges.push_back({e[0].get<int>(), e[1].get<int>()});
    }
    try {
      meta.cells.emplace_back(n, std::move(ops), std::move(edges));
    } catch (const std::invalid_argument& err) {
      throw SchemaError(err.what());
    }
  }
  return meta;
}

std::string to_canonical_string(const MetaGraph& meta) { return to_json(meta).dump(); }

MetaGraph metagraph_from_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw SchemaError(err.what());
  }
  return metagraph_from_json(doc);
}

MetaGraph load_metagraph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return metagraph_from_string(buffer.str());
}

void save_metagraph(const std::string& path, const MetaGraph& meta) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << to_canonical_string(meta) << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::string to_dot(const MetaGraph& meta) {
  std::ostringstream dot;
  dot << "digraph metagraph {\n  rankdir=LR;\n";
  for (std::size_t k = 0; k < meta.cells.size(); ++k) {
    const ActiveSubgraph sub = active_subgraph(meta.cells[k]);
    const int n = sub.cell.num_vertices();
    auto id = [k](int v) { return "s" + std::to_string(k) + "v" + std::to_string(v); };
    dot << "  subgraph cluster_" << k << " {\n    label=\"stage " << k << " (C="
        << meta.stages[k].base_channels << ", x" << meta.stages[k].repeats
        << ")\";\n";
    dot << "    " << id(0) << " [label=\"in\", shape=box];\n";
    for (int v = 1; v <= n - 2; ++v) {
      if (!sub.active[v]) continue;
      dot << "    " << id(v) << " [label=\"" << v << ":" << to_string(sub.cell.op(v))
          << "\"];\n";
    }
    dot << "    " << id(n - 1) << " [label=\"out\", shape=box];\n";
    for (const Edge& e : sub.cell.edges()) {
      dot << "    " << id(e.from) << " -> " << id(e.to) << ";\n";
    }
    // Implicit leaf-to-output concatenation.
    for (int v : sub.output_feeders) {
      if (!sub.cell.has_edge(v, n - 1)) {
        dot << "    " << id(v) << " -> " << id(n - 1) << " [style=dashed];\n";
      }
    }
    dot << "  }\n";
  }
  dot << "}\n";
  return dot.str();
}

}  // namespace dcs
