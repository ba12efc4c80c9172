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

#include "dcs/metagraph.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dcs {

int kernel_size(OperatorKind op) {
  switch (op) {
    case OperatorKind::kConv1x1: return 1;
    case OperatorKind::kDwConv3: return 3;
    case OperatorKind::kDwConv5: return 5;
    case OperatorKind::kDwConv7: return 7;
  }
  return 0;
}

std::string_view to_string(OperatorKind op) {
  switch (op) {
    case OperatorKind::kConv1x1: return "conv1x1";
    case OperatorKind::kDwConv3: return "dw3";
    case OperatorKind::kDwConv5: return "dw5";
    case OperatorKind::kDwConv7: return "dw7";
  }
  return "?";
}

OperatorKind parse_operator(std::string_view name) {
  if (name == "conv1x1") return OperatorKind::kConv1x1;
  if (name == "dw3") return OperatorKind::kDwConv3;
  if (name == "dw5") return OperatorKind::kDwConv5;
  if (name == "dw7") return OperatorKind::kDwConv7;
  throw SchemaError("unknown operator '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

CellGraph::CellGraph(int num_vertices, std::vector<OperatorKind> ops,
                     std::vector<Edge> edges)
    : num_vertices_(num_vertices), ops_(std::move(ops)), edges_(std::move(edges)) {
  if (num_vertices_ < 2 || num_vertices_ > kMaxVertices) {
    throw std::invalid_argument("CellGraph: vertex count " +
                                std::to_string(num_vertices_) +
                                " outside [2, 64]");
  }
  if (static_cast<int>(ops_.size()) != num_vertices_ - 2) {
    throw std::invalid_argument("CellGraph: expected " +
                                std::to_string(num_vertices_ - 2) +
                                " operators, got " + std::to_string(ops_.size()));
  }
  for (const Edge& e : edges_) {
    if (e.from < 0 || e.from >= num_vertices_ || e.to < 0 ||
        e.to >= num_vertices_) {
      throw std::invalid_argument("CellGraph: edge endpoint out of range");
    }
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

bool CellGraph::has_edge(int from, int to) const {
  return std::binary_search(edges_.begin(), edges_.end(), Edge{from, to});
}

bool CellGraph::add_edge(int from, int to) {
  if (from < 0 || from >= num_vertices_ || to < 0 || to >= num_vertices_) {
    throw std::invalid_argument("CellGraph: edge endpoint out of range");
  }
  const Edge e{from, to};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
  if (it != edges_.end() && *it == e) return false;
  edges_.insert(it, e);
  return true;
}

bool CellGraph::remove_edge(int from, int to) {
  const Edge e{from, to};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
  if (it == edges_.end() || *it != e) return false;
  edges_.erase(it);
  return true;
}

std::size_t slot_index(int num_vertices, int from, int to) {
  const auto n = static_cast<std::size_t>(num_vertices);
  const auto u = static_cast<std::size_t>(from);
  const auto v = static_cast<std::size_t>(to);
  return u * (n - 1) - u * (u - 1) / 2 + (v - u - 1);
}

Edge slot_edge(int num_vertices, std::size_t slot) {
  int u = 0;
  std::size_t row = static_cast<std::size_t>(num_vertices - 1);
  while (slot >= row) {
    slot -= row;
    --row;
    ++u;
  }
  return Edge{u, u + 1 + static_cast<int>(slot)};
}

std::vector<std::uint64_t> successor_masks(const CellGraph& cell) {
  std::vector<std::uint64_t> succ(cell.num_vertices(), 0);
  for (const Edge& e : cell.edges()) {
    if (e.from < e.to) succ[e.from] |= std::uint64_t{1} << e.to;
  }
  return succ;
}

std::vector<std::uint64_t> predecessor_masks(const CellGraph& cell) {
  std::vector<std::uint64_t> pred(cell.num_vertices(), 0);
  for (const Edge& e : cell.edges()) {
    if (e.from < e.to) pred[e.to] |= std::uint64_t{1} << e.from;
  }
  return pred;
}

bool MetaGraph::same_shape(const MetaGraph& other) const {
  if (cells.size() != other.cells.size()) return false;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (!cells[k].same_shape(other.cells[k])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Violation v) {
  switch (v) {
    case Violation::kTooFewVertices: return "fewer than 3 vertices";
    case Violation::kEdgeNotForward: return "edge violates u < v";
    case Violation::kInputHasIncoming: return "input vertex has an incoming edge";
    case Violation::kOutputHasOutgoing: return "output vertex has an outgoing edge";
    case Violation::kEmptyDerivation:
      return "no path from input to output (no active intermediate vertex)";
  }
  return "?";
}

bool ValidityReport::has(Violation v) const {
  return std::find(violations.begin(), violations.end(), v) != violations.end();
}

std::string ValidityReport::describe() const {
  if (ok()) return "OK";
  std::ostringstream out;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) out << "; ";
    out << to_string(violations[i]);
  }
  return out.str();
}

namespace {

// Reachability from vertex 0 along forward edges, restricted to intermediates.
std::vector<bool> reachable_intermediates(const CellGraph& cell) {
  const int n = cell.num_vertices();
  const auto pred = predecessor_masks(cell);
  std::vector<bool> reach(n, false);
  std::uint64_t reached = 1;  // vertex 0
  for (int v = 1; v <= n - 2; ++v) {
    if (pred[v] & reached) {
      reach[v] = true;
      reached |= std::uint64_t{1} << v;
    }
  }
  return reach;
}

}  // namespace

ValidityReport validate(const CellGraph& cell) {
  ValidityReport report;
  const int n = cell.num_vertices();
  if (n < 3) report.violations.push_back(Violation::kTooFewVertices);
  bool not_forward = false, input_in = false, output_out = false;
  for (const Edge& e : cell.edges()) {
    not_forward |= e.from >= e.to;
    input_in |= e.to == 0;
    output_out |= e.from == n - 1;
  }
  if (not_forward) report.violations.push_back(Violation::kEdgeNotForward);
  if (input_in) report.violations.push_back(Violation::kInputHasIncoming);
  if (output_out) report.violations.push_back(Violation::kOutputHasOutgoing);
  const auto reach = reachable_intermediates(cell);
  if (std::none_of(reach.begin(), reach.end(), [](bool b) { return b; })) {
    report.violations.push_back(Violation::kEmptyDerivation);
  }
  return report;
}

ValidityReport validate(const MetaGraph& meta) {
  ValidityReport report;
  if (meta.cells.empty() || meta.cells.size() != meta.stages.size()) {
    report.violations.push_back(Violation::kTooFewVertices);
    return report;
  }
  for (const CellGraph& cell : meta.cells) {
    for (Violation v : validate(cell).violations) {
      if (!report.has(v)) report.violations.push_back(v);
    }
  }
  return report;
}

bool is_structurally_valid(const CellGraph& cell) {
  const int n = cell.num_vertices();
  return std::all_of(cell.edges().begin(), cell.edges().end(), [n](const Edge& e) {
    return e.from < e.to && e.to != 0 && e.from != n - 1;
  });
}

// ---------------------------------------------------------------------------

int ActiveSubgraph::num_active() const {
  return static_cast<int>(std::count(active.begin(), active.end(), true));
}

ActiveSubgraph active_subgraph(const CellGraph& cell) {
  const int n = cell.num_vertices();
  ActiveSubgraph result;
  result.active = reachable_intermediates(cell);
  if (std::none_of(result.active.begin(), result.active.end(),
                   [](bool b) { return b; })) {
    throw EmptyDerivation("no intermediate vertex is reachable from the input");
  }
  const int out = n - 1;
  auto live = [&](int v) { return v == 0 || v == out || result.active[v]; };
  std::vector<Edge> kept;
  for (const Edge& e : cell.edges()) {
    if (e.from < e.to && live(e.from) && live(e.to)) kept.push_back(e);
  }
  result.cell = CellGraph(n, cell.ops(), std::move(kept));

  const auto succ = successor_masks(result.cell);
  std::uint64_t active_mask = 0;
  for (int v = 1; v <= n - 2; ++v) {
    if (result.active[v]) active_mask |= std::uint64_t{1} << v;
  }
  const std::uint64_t out_bit = std::uint64_t{1} << out;
  if (succ[0] & out_bit) result.output_feeders.push_back(0);
  for (int v = 1; v <= n - 2; ++v) {
    if (!result.active[v]) continue;
    if ((succ[v] & active_mask) == 0 || (succ[v] & out_bit) != 0) {
      result.output_feeders.push_back(v);
    }
  }
  return result;
}

std::vector<VertexChannels> infer_channels(const CellGraph& cell,
                                           const StageConfig& stage,
                                           int input_width) {
  const ActiveSubgraph sub = active_subgraph(cell);
  const int n = cell.num_vertices();
  if (input_width <= 0) input_width = stage.base_channels;
  std::vector<VertexChannels> widths(n);
  widths[0] = {input_width, input_width};
  const auto pred = predecessor_masks(sub.cell);
  for (int v = 1; v <= n - 2; ++v) {
    if (!sub.active[v]) continue;
    int in = 0;
    for (int u = 0; u < v; ++u) {
      if (pred[v] >> u & 1) in += widths[u].out;
    }
    const int out = is_projecting(cell.op(v)) ? stage.base_channels : in;
    widths[v] = {in, out};
  }
  int concat = 0;
  for (int v : sub.output_feeders) concat += widths[v].out;
  widths[n - 1] = {concat, concat};
  return widths;
}

OpCost operator_cost(OperatorKind op, int cin, int cout, int height, int width) {
  const auto hw = static_cast<std::uint64_t>(height) * static_cast<std::uint64_t>(width);
  const auto in = static_cast<std::uint64_t>(cin);
  const auto out = static_cast<std::uint64_t>(cout);
  if (is_projecting(op)) return {hw * in * out, in * out + 2 * out};
  const auto k2 = static_cast<std::uint64_t>(kernel_size(op) * kernel_size(op));
  return {hw * in * k2, in * k2 + 2 * in};
}

ArchStats arch_stats(const MetaGraph& meta) {
  ArchStats stats;
  for (std::size_t k = 0; k < meta.cells.size(); ++k) {
    const CellGraph& cell = meta.cells[k];
    const StageConfig& stage = meta.stages[k];
    const auto widths = infer_channels(cell, stage);
    std::uint64_t macs = 0, params = 0;
    int active = 0;
    for (int v = 1; v <= cell.num_intermediates(); ++v) {
      if (widths[v].in == 0) continue;
      ++active;
      const OpCost cost =
          operator_cost(cell.op(v), widths[v].in, widths[v].out, stage.height, stage.width);
      macs += cost.macs;
      params += cost.params;
    }
    stats.macs += macs * static_cast<std::uint64_t>(stage.repeats);
    stats.params += params * static_cast<std::uint64_t>(stage.repeats);
    stats.active_vertices.push_back(active);
  }
  return stats;
}

MetaGraph apply_width_multiplier(const MetaGraph& meta, double multiplier) {
  MetaGraph scaled = meta;
  for (StageConfig& stage : scaled.stages) {
    const long rounded = std::lround(stage.base_channels * multiplier / 8.0) * 8;
    stage.base_channels = static_cast<int>(std::max(8L, rounded));
  }
  return scaled;
}

ScaledMetaGraph scale_to_budget(const MetaGraph& meta, std::uint64_t target_macs) {
  auto macs_at = [&](double m) {
    return arch_stats(apply_width_multiplier(meta, m)).macs;
  };
  // Every stage floors at 8 channels once m is small enough.
  constexpr double kFloor = 1e-9;
  if (macs_at(kFloor) > target_macs) {
    throw BudgetTooSmall("minimum-width network needs " +
                         std::to_string(macs_at(kFloor)) + " MACs, budget is " +
                         std::to_string(target_macs));
  }
  // MACs are non-decreasing in m, so the feasible set is an interval from 0.
  constexpr double kCeiling = 4096.0;
  double lo = kFloor, hi = 1.0;
  while (macs_at(hi) <= target_macs) {
    lo = hi;
    if (hi >= kCeiling) return {hi, apply_width_multiplier(meta, hi)};
    hi *= 2.0;
  }
  for (int i = 0; i < 64 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (macs_at(mid) <= target_macs ? lo : hi) = mid;
  }
  return {lo, apply_width_multiplier(meta, lo)};
}

// ---------------------------------------------------------------------------

std::size_t encoding_dimension(const MetaGraph& meta) {
  std::size_t dim = 0;
  for (const CellGraph& cell : meta.cells) dim += cell.num_slots();
  return dim;
}

std::vector<std::uint8_t> encode(const MetaGraph& meta) {
  std::vector<std::uint8_t> bits(encoding_dimension(meta), 0);
  std::size_t offset = 0;
  for (const CellGraph& cell : meta.cells) {
    for (const Edge& e : cell.edges()) {
      if (e.from < e.to) bits[offset + slot_index(cell.num_vertices(), e.from, e.to)] = 1;
    }
    offset += cell.num_slots();
  }
  return bits;
}

MetaGraph decode(const MetaGraph& shape_template,
                 std::span<const std::uint8_t> bits) {
  if (bits.size() != encoding_dimension(shape_template)) {
    throw DimensionMismatch("decode: expected " +
                            std::to_string(encoding_dimension(shape_template)) +
                            " bits, got " + std::to_string(bits.size()));
  }
  MetaGraph meta = shape_template;
  std::size_t offset = 0;
  for (CellGraph& cell : meta.cells) {
    std::vector<Edge> edges;
    for (std::size_t s = 0; s < cell.num_slots(); ++s) {
      if (bits[offset + s]) edges.push_back(slot_edge(cell.num_vertices(), s));
    }
    offset += cell.num_slots();
    cell = CellGraph(cell.num_vertices(), cell.ops(), std::move(edges));
  }
  return meta;
}

// ---------------------------------------------------------------------------

std::vector<OperatorKind> preset_operator_template(int num_intermediates) {
  static constexpr OperatorKind kCycle[] = {
      OperatorKind::kConv1x1, OperatorKind::kDwConv3, OperatorKind::kDwConv5,
      OperatorKind::kDwConv7};
  std::vector<OperatorKind> ops(num_intermediates);
  for (int i = 0; i < num_intermediates; ++i) ops[i] = kCycle[i % 4];
  return ops;
}

MetaGraph preset_space(std::string_view name) {
  constexpr int kVertices = 18;
  struct StageSpec { int channels, repeats, spatial; };
  std::vector<StageSpec> specs;
  if (name == "imagenet") {
    // 224x224 input, 4x/8x/16x/32x down-sampling.
    specs = {{16, 1, 56}, {32, 1, 28}, {64, 1, 14}, {128, 1, 7}};
  } else if (name == "cifar10") {
    specs = {{16, 3, 32}, {32, 3, 16}, {64, 3, 8}};
  } else {
    throw UnknownPreset("'" + std::string(name) + "' (expected imagenet or cifar10)");
  }
  MetaGraph meta;
  for (const StageSpec& s : specs) {
    meta.cells.emplace_back(kVertices, preset_operator_template(kVertices - 2));
    meta.stages.push_back({s.channels, s.repeats, s.spatial, s.spatial});
  }
  return meta;
}

MetaGraph single_cell_space(int num_vertices, int base_channels, int spatial) {
  MetaGraph meta;
  meta.cells.emplace_back(num_vertices,
                          preset_operator_template(std::max(0, num_vertices - 2)));
  meta.stages.push_back({base_channels, 1, spatial, spatial});
  return meta;
}

}  // namespace dcs
