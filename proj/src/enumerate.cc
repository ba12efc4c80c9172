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

#include "dcs/enumerate.h"

#include <set>
#include <stdexcept>

#include "dcs/isomorphism.h"

namespace dcs {

CellGraph cell_from_mask(const CellGraph& shape, std::uint64_t mask) {
  std::vector<Edge> edges;
  for (std::size_t s = 0; s < shape.num_slots(); ++s) {
    if (mask >> s & 1) edges.push_back(slot_edge(shape.num_vertices(), s));
  }
  return CellGraph(shape.num_vertices(), shape.ops(), std::move(edges));
}

std::uint64_t mask_of(const CellGraph& cell) {
  std::uint64_t mask = 0;
  for (const Edge& e : cell.edges()) {
    if (e.from < e.to) mask |= std::uint64_t{1} << slot_index(cell.num_vertices(), e.from, e.to);
  }
  return mask;
}

Enumeration enumerate_space(const MetaGraph& shape, bool count_classes) {
  if (shape.cells.size() != 1) {
    throw std::invalid_argument("enumeration needs a single-cell template");
  }
  const CellGraph& cell = shape.cells.front();
  const std::size_t slots = cell.num_slots();
  if (slots > static_cast<std::size_t>(kMaxEnumerableSlots)) {
    throw SpaceTooLarge(std::to_string(cell.num_vertices()) + " vertices give 2^" +
                        std::to_string(slots) + " edge subsets (limit 2^" +
                        std::to_string(kMaxEnumerableSlots) + ")");
  }
  Enumeration result;
  std::set<CanonicalForm> classes;
  const std::uint64_t total = std::uint64_t{1} << slots;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    ++result.subsets_examined;
    CellGraph candidate = cell_from_mask(cell, mask);
    if (!validate(candidate).ok()) continue;
    if (count_classes) classes.insert(canonical_form(candidate));
    MetaGraph meta = shape;
    meta.cells.front() = std::move(candidate);
    result.valid.push_back(std::move(meta));
    result.masks.push_back(mask);
  }
  if (count_classes) result.num_classes = classes.size();
  return result;
}

}  // namespace dcs
