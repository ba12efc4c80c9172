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

// Append-only JSONL architecture store, one record per line:
//   {"meta": {...}, "perf": 0.71, "source": "measured", "canon": "...", "seed": 3}

#ifndef DCS_STORE_H_
#define DCS_STORE_H_

#include <string>
#include <vector>

#include <json.hpp>

#include "dcs/record.h"

namespace dcs {

nlohmann::json record_to_json(const ArchRecord& record);
// Throws SchemaError (line 0).
ArchRecord record_from_json(const nlohmann::json& doc);

// Throws IoError.
void store_append(const std::string& path, const std::vector<ArchRecord>& records);

// Fail-closed: any malformed line throws SchemaError carrying its 1-based
// line number. Blank lines are errors too. A missing file throws IoError; an
// empty one yields no records.
std::vector<ArchRecord> store_load(const std::string& path);

}  // namespace dcs

#endif  // DCS_STORE_H_
