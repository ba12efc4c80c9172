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

#ifndef DCS_RECORD_H_
#define DCS_RECORD_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "dcs/metagraph.h"

namespace dcs {

enum class RecordSource { kMeasured, kAugmented, kPredicted };

std::string_view to_string(RecordSource source);
// Throws SchemaError.
RecordSource parse_record_source(std::string_view name);

// An architecture-performance pair. Augmented records carry the performance
// and canonical key of the measurement they were derived from.
struct ArchRecord {
  MetaGraph meta;
  double perf = 0.0;
  RecordSource source = RecordSource::kMeasured;
  std::string canon;  // lowercase hex canonical key
  std::uint64_t seed = 0;

  bool operator==(const ArchRecord&) const = default;
};

}  // namespace dcs

#endif  // DCS_RECORD_H_
