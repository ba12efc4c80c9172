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

#ifndef DCS_PIPELINE_H_
#define DCS_PIPELINE_H_

#include <cstdint>
#include <vector>

#include "dcs/metagraph.h"
#include "dcs/predictor.h"
#include "dcs/record.h"
#include "dcs/search.h"

namespace dcs {

// Consecutive duplicate draws tolerated before sample_random gives up.
inline constexpr int kSampleMissLimit = 10000;

// n valid meta-graphs with pairwise distinct canonical keys. Throws
// SamplingExhausted after kSampleMissLimit consecutive duplicate draws, and
// std::invalid_argument for n < 1.
std::vector<MetaGraph> sample_random(const MetaGraph& shape, int n, std::uint64_t seed,
                                     double edge_probability = kDefaultEdgeProbability);

// Scores `metas` and wraps them as measured records.
std::vector<ArchRecord> measure(const std::vector<MetaGraph>& metas, ScoreOracle& oracle,
                                std::uint64_t seed);

inline constexpr double kTestFraction = 0.15;

struct DatasetSplit {
  Dataset train;
  Dataset test;
  std::vector<ArchRecord> train_records;  // including augmented variants
  std::vector<ArchRecord> test_records;
  std::size_t train_classes = 0;
  std::size_t test_classes = 0;
};

// Splits by canonical class (round(0.15 * classes) classes go to test), then
// augments measured training records by `augment_factor`. Throws
// EmptyDataset.
DatasetSplit build_dataset(const std::vector<ArchRecord>& records, int augment_factor,
                           std::uint64_t split_seed);

}  // namespace dcs

#endif  // DCS_PIPELINE_H_
