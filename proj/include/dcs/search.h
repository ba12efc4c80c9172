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

// Mutation kernel and the four search strategies over meta-graphs:
// Metropolis-Hastings evolutionary search (MH-ES), evolutionary search (ES),
// local search (LS) and random search (RS).

#ifndef DCS_SEARCH_H_
#define DCS_SEARCH_H_

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "dcs/metagraph.h"
#include "dcs/random.h"

namespace dcs {

// Anything that scores a meta-graph. Scores are expected in [0, 1].
class ScoreOracle {
 public:
  virtual ~ScoreOracle() = default;
  virtual double evaluate(const MetaGraph& meta) = 0;
  // True if evaluate() may be called from several threads at once.
  virtual bool thread_safe() const { return false; }
};

// ---------------------------------------------------------------------------
// Random sampling.

inline constexpr double kDefaultEdgeProbability = 0.25;

// Each upper-triangular slot is included independently with probability
// `edge_probability`; draws without an active intermediate are redrawn (up to
// 64 times) and the last one is repaired by adding (0, 1).
CellGraph random_cell(const CellGraph& shape, Rng& rng,
                      double edge_probability = kDefaultEdgeProbability);
MetaGraph random_metagraph(const MetaGraph& shape, Rng& rng,
                           double edge_probability = kDefaultEdgeProbability);

// ---------------------------------------------------------------------------
// Mutation.

enum class MutationKind { kResampleEdge, kAddEdge, kRemoveEdge };

std::string_view to_string(MutationKind kind);

inline constexpr int kMutationAttempts = 16;

struct Mutation {
  MetaGraph meta;
  int stage = -1;
  MutationKind kind = MutationKind::kAddEdge;
  // True when every attempt failed and `meta` is a copy of the input.
  bool fallback = false;
};

// Picks a stage and a kind uniformly. AddEdge fills a uniformly chosen empty
// slot, RemoveEdge clears a uniformly chosen edge, ResampleEdge does both (the
// cleared slot is not refilled). Inapplicable or invalidating draws are
// retried; after kMutationAttempts the input comes back unchanged.
Mutation mutate_detailed(const MetaGraph& meta, Rng& rng);
MetaGraph mutate(const MetaGraph& meta, Rng& rng);

// ---------------------------------------------------------------------------
// Annealing and acceptance.

// T0 * (1 + cos(r pi / R)) / 2. T0 = +inf stays +inf for every round (the ES
// limit), T0 = 0 stays 0 (the LS limit).
double temperature(int round, int rounds, double t0);

// Strictly better children are always accepted. Otherwise accept with
// probability min(1, exp((child - parent) / T)); T = 0 rejects.
bool mh_accept(double child_score, double parent_score, double temperature, Rng& rng);

// ---------------------------------------------------------------------------
// Search driver.

enum class Strategy { kMhEs, kEs, kLs, kRs };

std::string_view to_string(Strategy s);
// "mh-es" | "es" | "ls" | "rs"; throws std::invalid_argument.
Strategy parse_strategy(std::string_view name);

struct SearchConfig {
  int rounds = 10000;
  int population = 96;
  int initial_population = 4096;
  double t0 = 0.001;
  std::uint64_t seed = 0;
  Strategy strategy = Strategy::kMhEs;
  double edge_probability = kDefaultEdgeProbability;
  // Child evaluations per round run on this many threads when the oracle is
  // thread-safe. Results do not depend on it.
  int workers = 1;

  // Throws std::invalid_argument.
  void check() const;
};

struct TraceRow {
  int round = 0;
  double temperature = 0.0;
  double best_child_score = 0.0;
  bool accepted = false;
  double parent_score = 0.0;  // after the update
  double best_ever_score = 0.0;
  int fallbacks = 0;  // children that came back as identity mutations
};

struct SearchResult {
  MetaGraph best;
  double best_score = 0.0;
  MetaGraph parent;  // final parent
  double parent_score = 0.0;
  std::vector<TraceRow> trace;
  std::uint64_t oracle_calls = 0;
};

// Initial population of P0 random graphs, then R rounds of P children each.
// RS instead scores R * P further independent random graphs. Returns the
// best meta-graph ever scored. Oracle exceptions surface as OracleFailure
// with the round and child index.
SearchResult run_search(const SearchConfig& cfg, ScoreOracle& oracle,
                        const MetaGraph& space);

// round,temperature,best_child_score,accepted,parent_score,best_ever_score
std::string trace_to_csv(const std::vector<TraceRow>& trace);

}  // namespace dcs

#endif  // DCS_SEARCH_H_
