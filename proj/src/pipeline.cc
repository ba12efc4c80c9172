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

#include "dcs/pipeline.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "dcs/errors.h"
#include "dcs/isomorphism.h"
#include "dcs/random.h"

namespace dcs {

std::vector<MetaGraph> sample_random(const MetaGraph& shape, int n, std::uint64_t seed,
                                     double edge_probability) {
  if (n < 1) throw std::invalid_argument("sample count must be >= 1");
  Rng rng(seed);
  std::vector<MetaGraph> out;
  out.reserve(n);
  std::unordered_set<std::string> keys;
  int misses = 0;
  while (static_cast<int>(out.size()) < n) {
    MetaGraph meta = random_metagraph(shape, rng, edge_probability);
    if (keys.insert(canonical_key(meta)).second) {
      out.push_back(std::move(meta));
      misses = 0;
    } else if (++misses >= kSampleMissLimit) {
      throw SamplingExhausted("found " + std::to_string(out.size()) + " of " +
                              std::to_string(n) + " distinct classes");
    }
  }
  return out;
}

std::vector<ArchRecord> measure(const std::vector<MetaGraph>& metas, ScoreOracle& oracle,
                                std::uint64_t seed) {
  std::vector<ArchRecord> records;
  records.reserve(metas.size());
  for (const MetaGraph& meta : metas) {
    ArchRecord r;
    r.meta = meta;
    r.perf = oracle.evaluate(meta);
    r.source = RecordSource::kMeasured;
    r.canon = canonical_key(meta);
    r.seed = seed;
    records.push_back(std::move(r));
  }
  return records;
}

DatasetSplit build_dataset(const std::vector<ArchRecord>& records, int augment_factor,
                           std::uint64_t split_seed) {
  if (records.empty()) throw EmptyDataset("no records to split");
  if (augment_factor < 0) throw std::invalid_argument("augment factor must be >= 0");

  // Ordered by key so the shuffle below only depends on the seed.
  std::map<std::string, std::vector<std::size_t>> classes;
  for (std::size_t i = 0; i < records.size(); ++i) {
    classes[canonical_key(records[i].meta)].push_back(i);
  }
  std::vector<const std::string*> order;
  for (const auto& [key, members] : classes) order.push_back(&key);
  Rng rng(split_seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[uniform_index(rng, i)]);
  }
  const auto n_test = static_cast<std::size_t>(
      std::lround(kTestFraction * static_cast<double>(order.size())));

  DatasetSplit split;
  split.test.split = Split::kTest;
  split.test_classes = n_test;
  split.train_classes = order.size() - n_test;
  std::set<std::string> test_keys;
  for (std::size_t c = 0; c < order.size(); ++c) {
    const bool test = c < n_test;
    if (test) test_keys.insert(*order[c]);
    for (std::size_t i : classes.at(*order[c])) {
      (test ? split.test_records : split.train_records).push_back(records[i]);
    }
  }
  if (augment_factor > 0) {
    const std::size_t base = split.train_records.size();
    for (std::size_t i = 0; i < base; ++i) {
      const ArchRecord& r = split.train_records[i];
      if (r.source != RecordSource::kMeasured) continue;
      std::vector<ArchRecord> extra = augment(r, augment_factor, derive_seed({split_seed, i}));
      for (ArchRecord& v : extra) split.train_records.push_back(std::move(v));
    }
  }

  for (const ArchRecord& r : split.train_records) {
    if (test_keys.count(canonical_key(r.meta)) != 0) {
      throw std::logic_error("split hygiene violated: class " + r.canon +
                             " is on both sides");
    }
    split.train.add(r.meta, r.perf);
  }
  for (const ArchRecord& r : split.test_records) split.test.add(r.meta, r.perf);
  return split;
}

}  // namespace dcs
