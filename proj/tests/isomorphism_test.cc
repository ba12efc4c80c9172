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

#include <algorithm>
#include <numeric>
#include <set>

#include "dcs/errors.h"
#include "dcs/isomorphism.h"
#include "dcs/search.h"

using namespace dcs;

namespace {

using Op = OperatorKind;

// Minimum over every label-preserving, order-compatible relabeling, by
// trying all (N-2)! candidates.
std::vector<std::uint8_t> brute_force_canonical(const CellGraph& cell) {
  const int n = cell.num_vertices();
  std::vector<int> inner(n - 2);
  std::iota(inner.begin(), inner.end(), 1);
  std::vector<std::uint8_t> best;
  do {
    std::vector<int> map(n);
    map[0] = 0;
    map[n - 1] = n - 1;
    bool ok = true;
    for (int i = 0; i < n - 2 && ok; ++i) {
      map[i + 1] = inner[i];
      ok = cell.op(i + 1) == cell.op(inner[i]);
    }
    for (const Edge& e : cell.edges()) ok = ok && map[e.from] < map[e.to];
    if (!ok) continue;
    std::vector<std::uint8_t> bits(n * (n - 1) / 2, 0);
    for (const Edge& e : cell.edges()) bits[canonical_bit_index(map[e.from], map[e.to])] = 1;
    if (best.empty() || bits < best) best = bits;
  } while (std::next_permutation(inner.begin(), inner.end()));
  return best;
}

std::vector<std::uint8_t> unpack(const CanonicalForm& form) {
  std::vector<std::uint8_t> bits(form.num_bits);
  for (std::size_t i = 0; i < form.num_bits; ++i) bits[i] = form.bit(i);
  return bits;
}

MetaGraph wrap(CellGraph cell) {
  MetaGraph meta;
  meta.cells.push_back(std::move(cell));
  meta.stages.push_back({16, 1, 8, 8});
  return meta;
}

std::vector<Op> uniform_ops(int n, Op op) { return std::vector<Op>(n - 2, op); }

}  // namespace

TEST_CASE("canonical bit order is column-major") {
  CHECK(canonical_bit_index(0, 1) == 0);
  CHECK(canonical_bit_index(0, 2) == 1);
  CHECK(canonical_bit_index(1, 2) == 2);
  CHECK(canonical_bit_index(0, 3) == 3);
}

TEST_CASE("apply_permutation") {
  const CellGraph cell(5, uniform_ops(5, Op::kDwConv3), {{0, 1}, {0, 2}, {2, 3}, {1, 4}});
  CHECK(apply_permutation(cell, VertexPermutation::identity(5)) == cell);

  SUBCASE("swap of interchangeable vertices") {
    const VertexPermutation p{{0, 2, 1, 3, 4}};
    const CellGraph swapped = apply_permutation(cell, p);
    CHECK(swapped.has_edge(0, 2));
    CHECK(swapped.has_edge(1, 3));
    CHECK(swapped.has_edge(2, 4));
    CHECK(arch_stats(wrap(swapped)) == arch_stats(wrap(cell)));
  }
  SUBCASE("rejections") {
    const CellGraph mixed(4, {Op::kConv1x1, Op::kDwConv3}, {{0, 1}, {1, 3}});
    CHECK_THROWS_AS(apply_permutation(mixed, VertexPermutation{{0, 2, 1, 3}}),
                    InvalidPermutation);
    CHECK_THROWS_AS(apply_permutation(cell, VertexPermutation{{4, 1, 2, 3, 0}}),
                    InvalidPermutation);
    CHECK_THROWS_AS(apply_permutation(cell, VertexPermutation{{0, 1, 1, 3, 4}}),
                    InvalidPermutation);
    // 2 -> 3 would land before vertex 3's new label 2.
    CHECK_THROWS_AS(apply_permutation(cell, VertexPermutation{{0, 1, 3, 2, 4}}),
                    InvalidPermutation);
    CHECK(permutation_problem(cell, VertexPermutation{{0, 1, 3, 2, 4}}).has_value());
  }
  SUBCASE("inverse") {
    const VertexPermutation p{{0, 3, 1, 2, 4}};
    const VertexPermutation q = p.inverse();
    for (int v = 0; v < 5; ++v) CHECK(q.mapping[p.mapping[v]] == v);
  }
}

TEST_CASE("canonical form matches brute force on small cells") {
  Rng rng(1);
  for (int n = 3; n <= 8; ++n) {
    for (int trial = 0; trial < 60; ++trial) {
      std::vector<Op> ops(n - 2);
      const int kinds = 1 + static_cast<int>(uniform_index(rng, 3));
      for (Op& op : ops) op = static_cast<Op>(uniform_index(rng, kinds));
      const CellGraph cell = random_cell(CellGraph(n, ops), rng, 0.4);
      CHECK(unpack(canonical_form(cell)) == brute_force_canonical(cell));
    }
  }
}

TEST_CASE("canonical form examples") {
  const CellGraph empty(6, uniform_ops(6, Op::kDwConv5));
  const CanonicalForm zero = canonical_form(empty);
  CHECK(zero.num_bits == 15);
  CHECK(std::all_of(zero.bytes.begin(), zero.bytes.end(), [](auto b) { return b == 0; }));

  // One extra edge between differently labelled vertices changes the class.
  const std::vector<Op> ops{Op::kConv1x1, Op::kDwConv3, Op::kConv1x1, Op::kDwConv3};
  const CellGraph a(6, ops, {{0, 1}, {0, 3}, {1, 2}, {3, 4}});
  CellGraph b = a;
  b.add_edge(1, 4);
  CHECK(canonical_form(a) != canonical_form(b));
  CHECK(brute_force_canonical(a) != brute_force_canonical(b));
}

TEST_CASE("random permutations preserve the class") {
  Rng rng(2);
  const MetaGraph space = preset_space("imagenet");
  for (int trial = 0; trial < 40; ++trial) {
    const MetaGraph g = random_metagraph(space, rng);
    const int stage = static_cast<int>(uniform_index(rng, 4));
    const VertexPermutation p = random_valid_permutation(g.cells[stage], rng);
    CHECK_FALSE(permutation_problem(g.cells[stage], p).has_value());
    const MetaGraph h = apply_permutation(g, stage, p);
    CHECK(canonical_key(h) == canonical_key(g));
    CHECK(is_isomorphic(g, h));
    CHECK(arch_stats(h) == arch_stats(g));
  }
}

TEST_CASE("is_isomorphic") {
  Rng rng(3);
  const MetaGraph space = preset_space("cifar10");
  const MetaGraph a = random_metagraph(space, rng);
  CHECK(is_isomorphic(a, a));
  MetaGraph b = a;
  for (std::size_t s = 0; s < b.cells[0].num_slots(); ++s) {
    const Edge e = slot_edge(b.cells[0].num_vertices(), s);
    if (b.cells[0].add_edge(e.from, e.to)) break;
  }
  CHECK_FALSE(is_isomorphic(a, b));
  CHECK_THROWS_AS(is_isomorphic(a, preset_space("imagenet")), ShapeMismatch);
}

TEST_CASE("augment") {
  Rng rng(4);
  const MetaGraph space = preset_space("imagenet");
  ArchRecord record;
  record.meta = random_metagraph(space, rng);
  record.perf = 0.625;
  record.canon = canonical_key(record.meta);
  record.seed = 77;

  const auto variants = augment(record, 12, 99);
  CHECK(variants.size() == 12);
  std::set<std::vector<std::uint8_t>> seen{encode(record.meta)};
  for (const ArchRecord& v : variants) {
    CHECK(seen.insert(encode(v.meta)).second);
    CHECK(is_isomorphic(v.meta, record.meta));
    CHECK(v.perf == record.perf);
    CHECK(v.canon == record.canon);
    CHECK(v.source == RecordSource::kAugmented);
    int changed = 0;
    for (int s = 0; s < 4; ++s) changed += v.meta.cells[s] != record.meta.cells[s];
    CHECK(changed == 1);
  }
  CHECK(augment(record, 12, 99) == variants);
  CHECK(augment(record, 0, 99).empty());

  // A full chain admits only the identity relabeling.
  ArchRecord chain = record;
  chain.meta = space;
  for (CellGraph& cell : chain.meta.cells) {
    for (int v = 0; v < 17; ++v) cell.add_edge(v, v + 1);
  }
  CHECK(augment(chain, 12, 5).empty());
}
