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

#include "dcs/store.h"

#include <cmath>
#include <fstream>

#include "dcs/errors.h"
#include "dcs/isomorphism.h"
#include "dcs/serialization.h"

namespace dcs {

nlohmann::json record_to_json(const ArchRecord& record) {
  return {{"meta", to_json(record.meta)},
          {"perf", record.perf},
          {"source", std::string(to_string(record.source))},
          {"canon", record.canon},
          {"seed", record.seed}};
}

ArchRecord record_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SchemaError("record is not an object");
  for (const char* key : {"meta", "perf", "source", "canon", "seed"}) {
    if (!doc.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
  }
  ArchRecord r;
  r.meta = metagraph_from_json(doc.at("meta"));
  const ValidityReport report = validate(r.meta);
  if (!report.ok()) throw SchemaError("invalid meta-graph: " + report.describe());

  const nlohmann::json& perf = doc.at("perf");
  if (!perf.is_number()) throw SchemaError("perf is not a number");
  r.perf = perf.get<double>();
  if (!(r.perf >= 0.0 && r.perf <= 1.0)) throw SchemaError("perf outside [0, 1]");

  if (!doc.at("source").is_string()) throw SchemaError("source is not a string");
  r.source = parse_record_source(doc.at("source").get<std::string>());

  if (!doc.at("canon").is_string()) throw SchemaError("canon is not a string");
  r.canon = doc.at("canon").get<std::string>();
  if (r.canon != canonical_key(r.meta)) {
    throw SchemaError("canon does not match the meta-graph's canonical key");
  }

  if (!doc.at("seed").is_number_unsigned()) throw SchemaError("seed is not a non-negative integer");
  r.seed = doc.at("seed").get<std::uint64_t>();
  return r;
}

void store_append(const std::string& path, const std::vector<ArchRecord>& records) {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for appending");
  for (const ArchRecord& r : records) out << record_to_json(r).dump() << '\n';
  out.flush();
  if (!out) throw IoError("write to " + path + " failed");
}

std::vector<ArchRecord> store_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<ArchRecord> records;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    try {
      records.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const SchemaError& e) {
      throw SchemaError(std::string(e.what()).substr(sizeof "SchemaError: " - 1), number);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("malformed JSON: ") + e.what(), number);
    } catch (const std::invalid_argument& e) {
      throw SchemaError(e.what(), number);
    }
  }
  if (in.bad()) throw IoError("read from " + path + " failed");
  return records;
}

}  // namespace dcs
