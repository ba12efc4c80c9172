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

#ifndef DCS_SERIALIZATION_H_
#define DCS_SERIALIZATION_H_

#include <string>

#include "dcs/metagraph.h"
#include "json.hpp"

namespace dcs {

inline constexpr int kMetaGraphDocumentVersion = 1;

// {"version", "stages": [{base_channels, repeats, height, width}],
//  "cells": [{num_vertices, ops: ["conv1x1"|"dw3"|"dw5"|"dw7"], edges: [[u,v]]}]}
// Edges come out sorted, object keys sorted, so equal meta-graphs serialize
// byte-identically.
nlohmann::json to_json(const MetaGraph& meta);
// Throws SchemaError on any structural problem in the document.
MetaGraph metagraph_from_json(const nlohmann::json& doc);

std::string to_canonical_string(const MetaGraph& meta);
MetaGraph metagraph_from_string(const std::string& text);

MetaGraph load_metagraph(const std::string& path);
void save_metagraph(const std::string& path, const MetaGraph& meta);

// Graphviz rendering of each stage's active subgraph (pruned vertices are
// omitted), one cluster per stage.
std::string to_dot(const MetaGraph& meta);

}  // namespace dcs

#endif  // DCS_SERIALIZATION_H_
