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

#ifndef DCS_ENUMERATE_H_
#define DCS_ENUMERATE_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "dcs/metagraph.h"

namespace dcs {

// Largest exhaustively enumerable slot count (2^20 edge subsets).
inline constexpr int kMaxEnumerableSlots = 20;

struct Enumeration {
  std::vector<MetaGraph> valid;
  // Edge subset of each valid graph as a slot bitmask (bit s = row-major
  // slot s), parallel to `valid`.
  std::vector<std::uint64_t> masks;
  std::uint64_t subsets_examined = 0;
  std::optional<std::size_t> num_classes;  // set when classes were requested
};

// Every valid edge set of a single-cell template, in increasing mask order.
// Throws SpaceTooLarge beyond kMaxEnumerableSlots slots and
// std::invalid_argument for multi-stage templates.
Enumeration enumerate_space(const MetaGraph& shape, bool count_classes = false);

// Cell of `shape` with exactly the edges in `mask`.
CellGraph cell_from_mask(const CellGraph& shape, std::uint64_t mask);
std::uint64_t mask_of(const CellGraph& cell);

}  // namespace dcs

#endif  // DCS_ENUMERATE_H_
