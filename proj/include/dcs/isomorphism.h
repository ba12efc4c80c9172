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

// Label-preserving relabelings of cells, canonical forms and isomorphic data
// augmentation.
//
// A permutation p is valid for a cell when it fixes the input and output
// vertices, maps every intermediate vertex onto one carrying the same
// operator, and keeps every edge pointing forward (p(u) < p(v)), so the
// relabeled cell stays upper-triangular. Two cells are isomorphic when one is
// the image of the other under such a permutation.

#ifndef DCS_ISOMORPHISM_H_
#define DCS_ISOMORPHISM_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dcs/metagraph.h"
#include "dcs/random.h"
#include "dcs/record.h"

namespace dcs {

struct VertexPermutation {
  // mapping[v] is the new label of vertex v.
  std::vector<int> mapping;

  static VertexPermutation identity(int num_vertices);
  VertexPermutation inverse() const;
  bool operator==(const VertexPermutation&) const = default;
};

// Empty optional when `p` is valid for `cell`, otherwise the reason.
std::optional<std::string> permutation_problem(const CellGraph& cell,
                                               const VertexPermutation& p);

// Throws InvalidPermutation.
CellGraph apply_permutation(const CellGraph& cell, const VertexPermutation& p);
MetaGraph apply_permutation(const MetaGraph& meta, int stage,
                            const VertexPermutation& p);

// Some valid permutation for `cell`, drawn by randomized backtracking over
// label-preserving topological relabelings. The identity is always reachable,
// so this never fails; the draw is not uniform over the valid set.
VertexPermutation random_valid_permutation(const CellGraph& cell, Rng& rng);

// Lexicographically smallest adjacency bit string over all valid
// permutations. Bits are laid out column by column of the upper triangle,
// (0,1), (0,2), (1,2), (0,3), ..., and packed most-significant-bit first.
struct CanonicalForm {
  std::vector<std::uint8_t> bytes;
  std::size_t num_bits = 0;

  std::string hex() const;
  bool bit(std::size_t i) const { return bytes[i / 8] >> (7 - i % 8) & 1; }
  auto operator<=>(const CanonicalForm&) const = default;
};

// Index of slot (u, v), u < v, in the column-major bit layout.
std::size_t canonical_bit_index(int from, int to);

// Precondition: is_structurally_valid(cell).
CanonicalForm canonical_form(const CellGraph& cell);
// The permutation realizing canonical_form(cell):
// apply_permutation(cell, p) has the canonical adjacency.
VertexPermutation canonical_permutation(const CellGraph& cell);

// Stagewise concatenation of the cell forms' bytes.
CanonicalForm canonical_form(const MetaGraph& meta);
// Lowercase hex of canonical_form(meta); the deduplication key.
std::string canonical_key(const MetaGraph& meta);

// Throws ShapeMismatch unless both have the same stage count, vertex counts
// and operator templates.
bool is_isomorphic(const MetaGraph& a, const MetaGraph& b);

// Factor used when callers do not specify one.
inline constexpr int kDefaultAugmentFactor = 11;

// Up to k isomorphic variants of `record`, each obtained by relabeling one
// randomly chosen stage, pairwise distinct under encode() and distinct from
// the source. Deterministic in `seed`; may return fewer than k when the
// isomorphism class is small.
std::vector<ArchRecord> augment(const ArchRecord& record, int k,
                                std::uint64_t seed);

}  // namespace dcs

#endif  // DCS_ISOMORPHISM_H_
