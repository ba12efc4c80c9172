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

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

#include "dcs/errors.h"
#include "dcs/isomorphism.h"
#include "dcs/oracle.h"
#include "dcs/pipeline.h"
#include "dcs/store.h"

using namespace dcs;

namespace {

std::string temp_path(const char* name) { return std::string("/tmp/dcs_pipeline_test_") + name; }

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
}

std::vector<ArchRecord> measured(const char* preset, int n, std::uint64_t seed) {
  SyntheticOracle oracle(OracleKind::kSyntheticA, 0);
  return measure(sample_random(preset_space(preset), n, seed), oracle, seed);
}

}  // namespace

TEST_CASE("sample_random") {
  const std::vector<MetaGraph> metas = sample_random(preset_space("imagenet"), 800, 3);
  REQUIRE(metas.size() == 800);
  std::set<std::string> keys;
  for (const MetaGraph& m : metas) {
    CHECK(validate(m).ok());
    keys.insert(canonical_key(m));
  }
  CHECK(keys.size() == 800);
  CHECK(sample_random(preset_space("imagenet"), 5, 3) ==
        std::vector<MetaGraph>(metas.begin(), metas.begin() + 5));

  // cell:4 has 48 classes.
  CHECK(sample_random(single_cell_space(4), 48, 1, 0.5).size() == 48);
  CHECK_THROWS_AS(sample_random(single_cell_space(4), 49, 1, 0.5), SamplingExhausted);
  CHECK_THROWS_AS(sample_random(single_cell_space(4), 0, 1), std::invalid_argument);
}

TEST_CASE("measure") {
  const std::vector<ArchRecord> records = measured("cifar10", 10, 4);
  REQUIRE(records.size() == 10);
  for (const ArchRecord& r : records) {
    CHECK(r.source == RecordSource::kMeasured);
    CHECK(r.seed == 4);
    CHECK(r.canon == canonical_key(r.meta));
    CHECK(r.perf == synthetic_a_score(r.meta, 0));
  }
}

TEST_CASE("build_dataset") {
  const std::vector<ArchRecord> records = measured("cifar10", 100, 5);
  SUBCASE("class split with augmentation") {
    const DatasetSplit split = build_dataset(records, 11, 9);
    CHECK(split.test_classes == 15);
    CHECK(split.train_classes == 85);
    CHECK(split.test_records.size() == 15);
    CHECK(split.test.size() == 15);
    CHECK(split.train_records.size() > 85);
    CHECK(split.train_records.size() <= 85 * 12);
    CHECK(split.train.size() == split.train_records.size());
    std::set<std::string> test_keys;
    for (const ArchRecord& r : split.test_records) {
      CHECK(r.source == RecordSource::kMeasured);
      test_keys.insert(r.canon);
    }
    std::size_t augmented = 0;
    for (const ArchRecord& r : split.train_records) {
      CHECK(test_keys.count(canonical_key(r.meta)) == 0);
      augmented += r.source == RecordSource::kAugmented;
    }
    CHECK(augmented == split.train_records.size() - 85);
    CHECK(build_dataset(records, 11, 9).train_records == split.train_records);
  }
  SUBCASE("no augmentation") {
    const DatasetSplit split = build_dataset(records, 0, 9);
    CHECK(split.train_records.size() == 85);
    CHECK(split.test_records.size() == 15);
  }
  SUBCASE("duplicates stay on one side") {
    std::vector<ArchRecord> doubled = records;
    Rng rng(1);
    for (const ArchRecord& r : records) {
      ArchRecord twin = r;
      twin.meta = apply_permutation(r.meta, 0, random_valid_permutation(r.meta.cells[0], rng));
      doubled.push_back(twin);
    }
    const DatasetSplit split = build_dataset(doubled, 0, 2);
    CHECK(split.test_classes == 15);
    CHECK(split.test_records.size() == 30);
    CHECK(split.train_records.size() == 170);
  }
  CHECK_THROWS_AS(build_dataset({}, 11, 1), EmptyDataset);
  CHECK_THROWS_AS(build_dataset(records, -1, 1), std::invalid_argument);
}

TEST_CASE("store round trip") {
  const std::string path = temp_path("store.jsonl");
  std::remove(path.c_str());
  std::vector<ArchRecord> records = measured("cifar10", 3, 6);
  records[1].source = RecordSource::kAugmented;
  records[2].seed = 18446744073709551615ull;
  store_append(path, {records[0]});
  store_append(path, {records[1], records[2]});
  CHECK(store_load(path) == records);

  const nlohmann::json doc = record_to_json(records[0]);
  CHECK(doc.at("source") == "measured");
  CHECK(doc.at("canon") == records[0].canon);
  CHECK(record_from_json(doc) == records[0]);
  std::remove(path.c_str());
}

TEST_CASE("store is fail-closed") {
  const std::string path = temp_path("bad.jsonl");
  const ArchRecord good = measured("cifar10", 1, 7).front();
  const std::string line = record_to_json(good).dump();

  write_file(path, "");
  CHECK(store_load(path).empty());

  write_file(path, line + "\n" + line.substr(0, line.size() / 2));
  try {
    store_load(path);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 2);
  }

  write_file(path, line + "\n\n" + line + "\n");
  CHECK_THROWS_AS(store_load(path), SchemaError);

  auto mutated = [&](const char* key, const nlohmann::json& value) {
    nlohmann::json doc = record_to_json(good);
    doc[key] = value;
    return doc;
  };
  CHECK_THROWS_AS(record_from_json(mutated("perf", 1.5)), SchemaError);
  CHECK_THROWS_AS(record_from_json(mutated("perf", "high")), SchemaError);
  CHECK_THROWS_AS(record_from_json(mutated("canon", "00")), SchemaError);
  CHECK_THROWS_AS(record_from_json(mutated("source", "guessed")), SchemaError);
  CHECK_THROWS_AS(record_from_json(mutated("seed", -3)), SchemaError);
  nlohmann::json missing = record_to_json(good);
  missing.erase("meta");
  CHECK_THROWS_AS(record_from_json(missing), SchemaError);

  std::remove(path.c_str());
  CHECK_THROWS_AS(store_load(path), IoError);
}
