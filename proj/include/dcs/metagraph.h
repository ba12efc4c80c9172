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

// Dense-connectivity design space: per-stage cell DAGs, the meta-graph that
// stacks them, validity and active-subgraph semantics, channel / MAC /
// parameter accounting and the flat adjacency encoding.

#ifndef DCS_METAGRAPH_H_
#define DCS_METAGRAPH_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dcs/errors.h"

namespace dcs {

// Every operator implicitly carries batch-norm + ReLU.
enum class OperatorKind : std::uint8_t { kConv1x1, kDwConv3, kDwConv5, kDwConv7 };

inline constexpr int kNumOperatorKinds = 4;

int kernel_size(OperatorKind op);
// Only Conv1x1 changes the channel count.
inline bool is_projecting(OperatorKind op) { return op == OperatorKind::kConv1x1; }
// "conv1x1" | "dw3" | "dw5" | "dw7"
std::string_view to_string(OperatorKind op);
// Throws SchemaError on an unknown name.
OperatorKind parse_operator(std::string_view name);

struct Edge {
  int from = 0;
  int to = 0;
  auto operator<=>(const Edge&) const = default;
};

// One stage's DAG. Vertex 0 is the input, vertex N-1 the output, 1..N-2 carry
// an operator. The edge list is kept sorted and duplicate-free but is not
// otherwise policed here: malformed edges (u >= v, out of range endpoints
// are rejected outright) survive construction so that validate() can report
// them.
class CellGraph {
 public:
  // Largest supported N; bitmask-based algorithms rely on it.
  static constexpr int kMaxVertices = 64;

  CellGraph() = default;
  // Throws std::invalid_argument if ops.size() != N-2, N outside [2, 64], or
  // an edge endpoint lies outside [0, N).
  CellGraph(int num_vertices, std::vector<OperatorKind> ops,
            std::vector<Edge> edges = {});

  int num_vertices() const { return num_vertices_; }
  int output_vertex() const { return num_vertices_ - 1; }
  int num_intermediates() const { return num_vertices_ - 2; }
  // N(N-1)/2 upper-triangular slots.
  std::size_t num_slots() const {
    return static_cast<std::size_t>(num_vertices_) * (num_vertices_ - 1) / 2;
  }

  // Operator of intermediate vertex v, 1 <= v <= N-2.
  OperatorKind op(int v) const { return ops_[v - 1]; }
  const std::vector<OperatorKind>& ops() const { return ops_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t num_edges() const { return edges_.size(); }

  bool has_edge(int from, int to) const;
  // Return false when the edge was already present / absent.
  bool add_edge(int from, int to);
  bool remove_edge(int from, int to);

  // Same N and operator template (edges may differ).
  bool same_shape(const CellGraph& other) const {
    return num_vertices_ == other.num_vertices_ && ops_ == other.ops_;
  }

  bool operator==(const CellGraph&) const = default;

 private:
  int num_vertices_ = 0;
  std::vector<OperatorKind> ops_;
  std::vector<Edge> edges_;
};

// Row-major index of slot (u, v), u < v, in the upper-triangular layout.
std::size_t slot_index(int num_vertices, int from, int to);
// Inverse of slot_index.
Edge slot_edge(int num_vertices, std::size_t slot);

// Successor / predecessor bitmasks per vertex (bit w set <=> edge v->w / w->v).
// Only forward edges are represented.
std::vector<std::uint64_t> successor_masks(const CellGraph& cell);
std::vector<std::uint64_t> predecessor_masks(const CellGraph& cell);

struct StageConfig {
  int base_channels = 16;
  int repeats = 1;
  int height = 1;
  int width = 1;
  bool operator==(const StageConfig&) const = default;
};

struct MetaGraph {
  std::vector<CellGraph> cells;
  std::vector<StageConfig> stages;

  int num_stages() const { return static_cast<int>(cells.size()); }
  bool same_shape(const MetaGraph& other) const;
  bool operator==(const MetaGraph&) const = default;
};

// ---------------------------------------------------------------------------
// Validity.

enum class Violation {
  kTooFewVertices,      // N < 3
  kEdgeNotForward,      // some edge has u >= v
  kInputHasIncoming,    // vertex 0 receives an edge
  kOutputHasOutgoing,   // vertex N-1 emits an edge
  kEmptyDerivation,     // no intermediate vertex reachable from the input
};

std::string_view to_string(Violation v);

struct ValidityReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has(Violation v) const;
  std::string describe() const;
};

ValidityReport validate(const CellGraph& cell);
ValidityReport validate(const MetaGraph& meta);
// Edge ordering and endpoint roles only (everything except kEmptyDerivation).
bool is_structurally_valid(const CellGraph& cell);

// ---------------------------------------------------------------------------
// Active subgraph.

struct ActiveSubgraph {
  // Same vertex numbering as the source; pruned vertices keep no edges.
  CellGraph cell;
  // Indexed by vertex, true for active intermediates.
  std::vector<bool> active;
  // Vertices concatenated into the output: active intermediates with no
  // outgoing edge to another active intermediate, active intermediates with an
  // explicit edge to the output, and the input when (0, N-1) is present.
  std::vector<int> output_feeders;

  int num_active() const;
};

// Throws EmptyDerivation when no intermediate vertex is reachable from vertex
// 0. Precondition: is_structurally_valid(cell).
ActiveSubgraph active_subgraph(const CellGraph& cell);

struct VertexChannels {
  int in = 0;
  int out = 0;
  bool operator==(const VertexChannels&) const = default;
};

// Per-vertex widths, indexed by vertex. Vertex 0 has in == out == input
// width; the output vertex has in == out == concatenated feeder width;
// pruned vertices are {0, 0}. `input_width` <= 0 means stage.base_channels.
std::vector<VertexChannels> infer_channels(const CellGraph& cell,
                                           const StageConfig& stage,
                                           int input_width = 0);

struct ArchStats {
  std::uint64_t macs = 0;
  std::uint64_t params = 0;
  std::vector<int> active_vertices;  // per stage
  bool operator==(const ArchStats&) const = default;
};

struct OpCost {
  std::uint64_t macs = 0;
  std::uint64_t params = 0;
};

// Conv1x1: H*W*Cin*Cout MACs, Cin*Cout + 2*Cout params. Depthwise k: H*W*Cin*k^2
// MACs, Cin*k^2 + 2*Cin params (`cout` is ignored). BN counted as 2 per channel.
OpCost operator_cost(OperatorKind op, int cin, int cout, int height, int width);

// Searched portion only: stem, stage transitions and head are excluded. Each
// cell copy takes a base_channels-wide input.
ArchStats arch_stats(const MetaGraph& meta);

struct ScaledMetaGraph {
  double multiplier = 1.0;
  MetaGraph meta;
};

// Channels of a meta-graph under a uniform width multiplier: each stage's base
// width becomes round(C * m / 8) * 8, floored at 8.
MetaGraph apply_width_multiplier(const MetaGraph& meta, double multiplier);

// Largest multiplier whose scaled network fits in `target_macs`. Throws
// BudgetTooSmall when even the all-8-channel network is over budget.
ScaledMetaGraph scale_to_budget(const MetaGraph& meta, std::uint64_t target_macs);

// ---------------------------------------------------------------------------
// Encoding.

// Row-major upper-triangular adjacency bits, concatenated over stages.
std::vector<std::uint8_t> encode(const MetaGraph& meta);
std::size_t encoding_dimension(const MetaGraph& meta);
// Rebuilds edge sets onto the shape of `shape_template`.
MetaGraph decode(const MetaGraph& shape_template,
                 std::span<const std::uint8_t> bits);

// ---------------------------------------------------------------------------
// Preset spaces.

// "imagenet": 4 stages of N=18 cells; "cifar10": 3 stages, channels 16/32/64,
// 3 repeats. Edge sets are empty. Throws UnknownPreset.
MetaGraph preset_space(std::string_view name);

// The fixed 16-vertex operator assignment of the presets: vertices 1,5,9,13
// Conv1x1, then DwConv3, DwConv5, DwConv7 in the same stride.
std::vector<OperatorKind> preset_operator_template(int num_intermediates = 16);

// A single-cell space of N vertices using the preset operator cycle, for
// enumerable experiments.
MetaGraph single_cell_space(int num_vertices, int base_channels = 16,
                            int spatial = 8);

}  // namespace dcs

#endif  // DCS_METAGRAPH_H_
