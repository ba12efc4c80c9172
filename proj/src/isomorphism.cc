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

#include "dcs/isomorphism.h"

#include <algorithm>
#include <bit>
#include <numeric>
#include <set>

namespace dcs {

std::string_view to_string(RecordSource source) {
  switch (source) {
    case RecordSource::kMeasured: return "measured";
    case RecordSource::kAugmented: return "augmented";
    case RecordSource::kPredicted: return "predicted";
  }
  return "?";
}

RecordSource parse_record_source(std::string_view name) {
  if (name == "measured") return RecordSource::kMeasured;
  if (name == "augmented") return RecordSource::kAugmented;
  if (name == "predicted") return RecordSource::kPredicted;
  throw SchemaError("unknown record source '" + std::string(name) + "'");
}

VertexPermutation VertexPermutation::identity(int num_vertices) {
  VertexPermutation p;
  p.mapping.resize(num_vertices);
  std::iota(p.mapping.begin(), p.mapping.end(), 0);
  return p;
}

VertexPermutation VertexPermutation::inverse() const {
  VertexPermutation inv;
  inv.mapping.resize(mapping.size());
  for (std::size_t v = 0; v < mapping.size(); ++v) inv.mapping[mapping[v]] = static_cast<int>(v);
  return inv;
}

std::optional<std::string> permutation_problem(const CellGraph& cell,
                                               const VertexPermutation& p) {
  const int n = cell.num_vertices();
  if (static_cast<int>(p.mapping.size()) != n) return "size differs from vertex count";
  std::vector<bool> hit(n, false);
  for (int image : p.mapping) {
    if (image < 0 || image >= n || hit[image]) return "mapping is not a bijection";
    hit[image] = true;
  }
  if (p.mapping[0] != 0 || p.mapping[n - 1] != n - 1) {
    return "input/output vertex not fixed";
  }
  for (int v = 1; v <= n - 2; ++v) {
    if (cell.op(p.mapping[v]) != cell.op(v)) {
      return "vertex " + std::to_string(v) + " mapped onto a different operator";
    }
  }
  for (const Edge& e : cell.edges()) {
    if (p.mapping[e.from] >= p.mapping[e.to]) {
      return "edge (" + std::to_string(e.from) + "," + std::to_string(e.to) +
             ") would point backwards";
    }
  }
  return std::nullopt;
}

CellGraph apply_permutation(const CellGraph& cell, const VertexPermutation& p) {
  if (auto problem = permutation_problem(cell, p)) throw InvalidPermutation(*problem);
  std::vector<Edge> edges;
  edges.reserve(cell.num_edges());
  for (const Edge& e : cell.edges()) {
    edges.push_back({p.mapping[e.from], p.mapping[e.to]});
  }
  return CellGraph(cell.num_vertices(), cell.ops(), std::move(edges));
}

MetaGraph apply_permutation(const MetaGraph& meta, int stage,
                            const VertexPermutation& p) {
  MetaGraph out = meta;
  out.cells.at(stage) = apply_permutation(meta.cells.at(stage), p);
  return out;
}

namespace {

// Vertex v may take the next free label once all of its intermediate
// predecessors are labelled; the input is always labelled.
bool ready(std::uint64_t pred_mask, std::uint64_t unassigned) {
  return (pred_mask & unassigned) == 0;
}

bool random_fill(const CellGraph& cell, const std::vector<std::uint64_t>& pred,
                 int position, std::uint64_t unassigned, std::vector<int>& order,
                 Rng& rng) {
  const int n = cell.num_vertices();
  if (position == n - 1) return true;
  std::vector<int> candidates;
  for (int v = 1; v <= n - 2; ++v) {
    if ((unassigned >> v & 1) && cell.op(v) == cell.op(position) &&
        ready(pred[v], unassigned)) {
      candidates.push_back(v);
    }
  }
  // Fisher-Yates with our own index draw.
  for (std::size_t i = candidates.size(); i > 1; --i) {
    std::swap(candidates[i - 1], candidates[uniform_index(rng, i)]);
  }
  for (int v : candidates) {
    order[position] = v;
    if (random_fill(cell, pred, position + 1, unassigned & ~(std::uint64_t{1} << v),
                    order, rng)) {
      return true;
    }
  }
  return false;
}

// Branch-and-bound search for the lexicographically smallest column-major
// adjacency string. order[m] is the original vertex that receives label m.
// Columns are stored bit-reversed (label i at bit 63 - i) so that integer
// comparison is lexicographic comparison with 0 < 1.
class Canonicalizer {
 public:
  explicit Canonicalizer(const CellGraph& cell)
      : cell_(cell), n_(cell.num_vertices()), pred_(predecessor_masks(cell)),
        twin_(n_, -1), order_(n_), best_order_(n_), cur_(n_, 0), best_(n_, 0) {
    const auto succ = successor_masks(cell);
    // Twins (same operator, same in- and out-neighbourhoods) are
    // interchangeable; trying the lowest unlabelled one is enough.
    for (int v = 1; v <= n_ - 2; ++v) {
      twin_[v] = v;
      for (int w = 1; w < v; ++w) {
        if (cell.op(w) == cell.op(v) && pred_[w] == pred_[v] && succ[w] == succ[v]) {
          twin_[v] = twin_[w];
          break;
        }
      }
    }
  }

  VertexPermutation run() {
    order_[0] = 0;
    order_[n_ - 1] = n_ - 1;
    std::uint64_t unassigned = 0;
    for (int v = 1; v <= n_ - 2; ++v) unassigned |= std::uint64_t{1} << v;
    search(1, unassigned, /*prefix_less=*/true);
    VertexPermutation q;
    q.mapping = best_order_;
    return q.inverse();
  }

 private:
  std::uint64_t column(int v, int m) const {
    std::uint64_t col = 0;
    for (int i = 0; i < m; ++i) {
      if (pred_[v] >> order_[i] & 1) col |= std::uint64_t{1} << (63 - i);
    }
    return col;
  }

  // Returns true if best_ was replaced somewhere below; the caller's prefix
  // then equals best_'s prefix.
  bool search(int m, std::uint64_t unassigned, bool prefix_less) {
    if (m == n_ - 1) {
      const std::uint64_t last = column(n_ - 1, n_ - 1);
      if (!has_best_ || prefix_less || last < best_[n_ - 1]) {
        cur_[n_ - 1] = last;
        best_ = cur_;
        best_order_ = order_;
        has_best_ = true;
        return true;
      }
      return false;
    }
    const OperatorKind want = cell_.op(m);
    struct Candidate {
      std::uint64_t col;
      int v;
    };
    Candidate cands[CellGraph::kMaxVertices];
    int count = 0;
    std::uint64_t tried_twins = 0;
    for (int v = 1; v <= n_ - 2; ++v) {
      if (!(unassigned >> v & 1) || cell_.op(v) != want || !ready(pred_[v], unassigned)) {
        continue;
      }
      const std::uint64_t twin_bit = std::uint64_t{1} << twin_[v];
      if (tried_twins & twin_bit) continue;
      tried_twins |= twin_bit;
      cands[count++] = {column(v, m), v};
    }
    std::sort(cands, cands + count, [](const Candidate& a, const Candidate& b) {
      return a.col != b.col ? a.col < b.col : a.v < b.v;
    });
    bool updated = false;
    for (int c = 0; c < count; ++c) {
      const Candidate& cand = cands[c];
      bool less = prefix_less || !has_best_;
      if (!less) {
        if (cand.col > best_[m]) break;  // sorted: every later one is worse too
        less = cand.col < best_[m];
      }
      cur_[m] = cand.col;
      order_[m] = cand.v;
      if (search(m + 1, unassigned & ~(std::uint64_t{1} << cand.v), less)) {
        updated = true;
        prefix_less = false;
      }
    }
    return updated;
  }

  const CellGraph& cell_;
  int n_;
  std::vector<std::uint64_t> pred_;
  std::vector<int> twin_;
  std::vector<int> order_, best_order_;
  std::vector<std::uint64_t> cur_, best_;
  bool has_best_ = false;
};

constexpr char kHexDigits[] = "0123456789abcdef";

}  // namespace

VertexPermutation random_valid_permutation(const CellGraph& cell, Rng& rng) {
  const int n = cell.num_vertices();
  std::vector<int> order(n);
  order[0] = 0;
  order[n - 1] = n - 1;
  std::uint64_t unassigned = 0;
  for (int v = 1; v <= n - 2; ++v) unassigned |= std::uint64_t{1} << v;
  const auto pred = predecessor_masks(cell);
  if (!random_fill(cell, pred, 1, unassigned, order, rng)) {
    return VertexPermutation::identity(n);  // unreachable for forward-only cells
  }
  VertexPermutation q;
  q.mapping = std::move(order);
  return q.inverse();
}

std::size_t canonical_bit_index(int from, int to) {
  return static_cast<std::size_t>(to) * (to - 1) / 2 + static_cast<std::size_t>(from);
}

VertexPermutation canonical_permutation(const CellGraph& cell) {
  return Canonicalizer(cell).run();
}

CanonicalForm canonical_form(const CellGraph& cell) {
  const CellGraph canon = apply_permutation(cell, canonical_permutation(cell));
  CanonicalForm form;
  form.num_bits = canon.num_slots();
  form.bytes.assign((form.num_bits + 7) / 8, 0);
  for (const Edge& e : canon.edges()) {
    const std::size_t i = canonical_bit_index(e.from, e.to);
    form.bytes[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  return form;
}

std::string CanonicalForm::hex() const {
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kHexDigits[b >> 4]);
    out.push_back(kHexDigits[b & 0xf]);
  }
  return out;
}

CanonicalForm canonical_form(const MetaGraph& meta) {
  CanonicalForm form;
  for (const CellGraph& cell : meta.cells) {
    const CanonicalForm part = canonical_form(cell);
    form.bytes.insert(form.bytes.end(), part.bytes.begin(), part.bytes.end());
    form.num_bits += part.bytes.size() * 8;
  }
  return form;
}

std::string canonical_key(const MetaGraph& meta) { return canonical_form(meta).hex(); }

bool is_isomorphic(const MetaGraph& a, const MetaGraph& b) {
  if (!a.same_shape(b)) {
    throw ShapeMismatch("meta-graphs differ in stage count or cell templates");
  }
  for (std::size_t k = 0; k < a.cells.size(); ++k) {
    if (a.cells[k].num_edges() != b.cells[k].num_edges()) return false;
    if (canonical_form(a.cells[k]) != canonical_form(b.cells[k])) return false;
  }
  return true;
}

std::vector<ArchRecord> augment(const ArchRecord& record, int k, std::uint64_t seed) {
  std::vector<ArchRecord> variants;
  if (k <= 0) return variants;
  Rng rng(seed);
  std::set<std::vector<std::uint8_t>> seen{encode(record.meta)};
  const int stages = record.meta.num_stages();
  const int max_attempts = 32 * k + 64;
  for (int attempt = 0; attempt < max_attempts && static_cast<int>(variants.size()) < k;
       ++attempt) {
    const int stage = static_cast<int>(uniform_index(rng, stages));
    const VertexPermutation p =
        random_valid_permutation(record.meta.cells[stage], rng);
    MetaGraph meta = apply_permutation(record.meta, stage, p);
    if (!seen.insert(encode(meta)).second) continue;
    ArchRecord variant = record;
    variant.meta = std::move(meta);
    variant.source = RecordSource::kAugmented;
    variants.push_back(std::move(variant));
  }
  return variants;
}

}  // namespace dcs
