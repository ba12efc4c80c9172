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

#include "dcs/search.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <thread>

namespace dcs {

CellGraph random_cell(const CellGraph& shape, Rng& rng, double edge_probability) {
  constexpr int kAttempts = 64;
  const int n = shape.num_vertices();
  std::vector<Edge> edges;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    edges.clear();
    for (std::size_t s = 0; s < shape.num_slots(); ++s) {
      if (bernoulli(rng, edge_probability)) edges.push_back(slot_edge(n, s));
    }
    CellGraph cell(n, shape.ops(), edges);
    if (validate(cell).ok()) return cell;
  }
  CellGraph cell(n, shape.ops(), std::move(edges));
  if (n >= 3) cell.add_edge(0, 1);
  return cell;
}

MetaGraph random_metagraph(const MetaGraph& shape, Rng& rng, double edge_probability) {
  MetaGraph meta = shape;
  for (CellGraph& cell : meta.cells) cell = random_cell(cell, rng, edge_probability);
  return meta;
}

std::string_view to_string(MutationKind kind) {
  switch (kind) {
    case MutationKind::kResampleEdge: return "resample";
    case MutationKind::kAddEdge: return "add";
    case MutationKind::kRemoveEdge: return "remove";
  }
  return "?";
}

namespace {

// Uniform absent slot, skipping `exclude` (a slot index or npos).
std::optional<Edge> pick_absent(const CellGraph& cell, Rng& rng,
                                std::size_t exclude = std::size_t(-1)) {
  const int n = cell.num_vertices();
  std::vector<std::uint8_t> present(cell.num_slots(), 0);
  for (const Edge& e : cell.edges()) present[slot_index(n, e.from, e.to)] = 1;
  if (exclude < present.size()) present[exclude] = 1;
  const auto free = static_cast<std::size_t>(
      std::count(present.begin(), present.end(), std::uint8_t{0}));
  if (free == 0) return std::nullopt;
  std::size_t target = uniform_index(rng, free);
  for (std::size_t s = 0; s < present.size(); ++s) {
    if (present[s]) continue;
    if (target-- == 0) return slot_edge(n, s);
  }
  return std::nullopt;
}

}  // namespace

Mutation mutate_detailed(const MetaGraph& meta, Rng& rng) {
  for (int attempt = 0; attempt < kMutationAttempts; ++attempt) {
    const int stage = static_cast<int>(uniform_index(rng, meta.cells.size()));
    const auto kind = static_cast<MutationKind>(uniform_index(rng, 3));
    CellGraph cell = meta.cells[stage];
    const int n = cell.num_vertices();
    bool applied = false;
    switch (kind) {
      case MutationKind::kAddEdge: {
        if (auto e = pick_absent(cell, rng)) applied = cell.add_edge(e->from, e->to);
        break;
      }
      case MutationKind::kRemoveEdge: {
        if (cell.num_edges() == 0) break;
        const Edge e = cell.edges()[uniform_index(rng, cell.num_edges())];
        applied = cell.remove_edge(e.from, e.to);
        break;
      }
      case MutationKind::kResampleEdge: {
        if (cell.num_edges() == 0) break;
        const Edge removed = cell.edges()[uniform_index(rng, cell.num_edges())];
        cell.remove_edge(removed.from, removed.to);
        if (auto e = pick_absent(cell, rng, slot_index(n, removed.from, removed.to))) {
          applied = cell.add_edge(e->from, e->to);
        }
        break;
      }
    }
    if (!applied || !validate(cell).ok()) continue;
    Mutation m{meta, stage, kind, false};
    m.meta.cells[stage] = std::move(cell);
    return m;
  }
  return Mutation{meta, -1, MutationKind::kAddEdge, true};
}

MetaGraph mutate(const MetaGraph& meta, Rng& rng) {
  return mutate_detailed(meta, rng).meta;
}

double temperature(int round, int rounds, double t0) {
  if (std::isinf(t0) || t0 == 0.0) return t0;
  const double phase = std::numbers::pi * (static_cast<double>(round) / rounds);
  return t0 * (1.0 + std::cos(phase)) / 2.0;
}

bool mh_accept(double child_score, double parent_score, double t, Rng& rng) {
  if (child_score > parent_score) return true;
  if (t <= 0.0) return false;
  const double p = std::min(1.0, std::exp((child_score - parent_score) / t));
  return uniform01(rng) < p;
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kMhEs: return "mh-es";
    case Strategy::kEs: return "es";
    case Strategy::kLs: return "ls";
    case Strategy::kRs: return "rs";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "mh-es") return Strategy::kMhEs;
  if (name == "es") return Strategy::kEs;
  if (name == "ls") return Strategy::kLs;
  if (name == "rs") return Strategy::kRs;
  throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

void SearchConfig::check() const {
  if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  if (population < 1) throw std::invalid_argument("population must be >= 1");
  if (initial_population < 1) {
    throw std::invalid_argument("initial population must be >= 1");
  }
  if (!(t0 >= 0.0)) throw std::invalid_argument("t0 must be >= 0");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
}

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kInitTag = 0x1417;
constexpr std::uint64_t kChildTag = 0xc41d;
constexpr std::uint64_t kAcceptTag = 0xacce;

class Evaluator {
 public:
  Evaluator(ScoreOracle& oracle, int workers)
      : oracle_(oracle), workers_(oracle.thread_safe() ? workers : 1) {}

  std::vector<double> score_all(const std::vector<MetaGraph>& metas, int round) {
    std::vector<double> scores(metas.size());
    std::vector<std::exception_ptr> errors(metas.size());
    auto work = [&](std::size_t begin, std::size_t step) {
      for (std::size_t i = begin; i < metas.size(); i += step) {
        try {
          scores[i] = oracle_.evaluate(metas[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    if (workers_ <= 1 || metas.size() < 2) {
      work(0, 1);
    } else {
      std::vector<std::jthread> pool;
      const auto step = static_cast<std::size_t>(workers_);
      for (std::size_t w = 0; w < step; ++w) pool.emplace_back(work, w, step);
    }
    calls_ += metas.size();
    for (std::size_t i = 0; i < metas.size(); ++i) {
      if (!errors[i]) continue;
      std::string what = "unknown error";
      try {
        std::rethrow_exception(errors[i]);
      } catch (const std::exception& e) {
        what = e.what();
      } catch (...) {
      }
      throw OracleFailure("round " + std::to_string(round) + ", candidate " +
                          std::to_string(i) + ": " + what);
    }
    return scores;
  }

  std::uint64_t calls() const { return calls_; }

 private:
  ScoreOracle& oracle_;
  int workers_;
  std::uint64_t calls_ = 0;
};

std::size_t argmax(const std::vector<double>& v) {
  // Lowest index wins ties.
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

SearchResult run_search(const SearchConfig& cfg, ScoreOracle& oracle,
                        const MetaGraph& space) {
  cfg.check();
  Evaluator evaluator(oracle, cfg.workers);
  SearchResult result;

  auto random_batch = [&](int round, int count) {
    std::vector<MetaGraph> batch;
    batch.reserve(count);
    for (int i = 0; i < count; ++i) {
      Rng rng(derive_seed({cfg.seed, kInitTag, static_cast<std::uint64_t>(round),
                           static_cast<std::uint64_t>(i)}));
      batch.push_back(random_metagraph(space, rng, cfg.edge_probability));
    }
    return batch;
  };

  {
    std::vector<MetaGraph> init = random_batch(0, cfg.initial_population);
    const std::vector<double> scores = evaluator.score_all(init, 0);
    const std::size_t best = argmax(scores);
    result.parent = init[best];
    result.parent_score = scores[best];
    result.best = init[best];
    result.best_score = scores[best];
  }

  result.trace.reserve(cfg.rounds);
  for (int r = 1; r <= cfg.rounds; ++r) {
    TraceRow row;
    row.round = r;
    switch (cfg.strategy) {
      case Strategy::kMhEs: row.temperature = temperature(r, cfg.rounds, cfg.t0); break;
      case Strategy::kEs: row.temperature = std::numeric_limits<double>::infinity(); break;
      case Strategy::kLs:
      case Strategy::kRs: row.temperature = 0.0; break;
    }

    std::vector<MetaGraph> children;
    if (cfg.strategy == Strategy::kRs) {
      children = random_batch(r, cfg.population);
    } else {
      children.reserve(cfg.population);
      for (int c = 0; c < cfg.population; ++c) {
        Rng rng(derive_seed({cfg.seed, kChildTag, static_cast<std::uint64_t>(r),
                             static_cast<std::uint64_t>(c)}));
        Mutation m = mutate_detailed(result.parent, rng);
        row.fallbacks += m.fallback ? 1 : 0;
        children.push_back(std::move(m.meta));
      }
    }
    const std::vector<double> scores = evaluator.score_all(children, r);
    const std::size_t best = argmax(scores);
    row.best_child_score = scores[best];

    switch (cfg.strategy) {
      case Strategy::kMhEs: {
        Rng rng(derive_seed({cfg.seed, kAcceptTag, static_cast<std::uint64_t>(r)}));
        row.accepted = mh_accept(scores[best], result.parent_score, row.temperature, rng);
        break;
      }
      case Strategy::kEs: row.accepted = true; break;
      case Strategy::kLs: row.accepted = scores[best] > result.parent_score; break;
      case Strategy::kRs: row.accepted = scores[best] > result.best_score; break;
    }
    if (row.accepted) {
      result.parent = children[best];
      result.parent_score = scores[best];
    }
    if (scores[best] > result.best_score) {
      result.best = children[best];
      result.best_score = scores[best];
    }
    row.parent_score = result.parent_score;
    row.best_ever_score = result.best_score;
    result.trace.push_back(row);
  }
  result.oracle_calls = evaluator.calls();
  return result;
}

std::string trace_to_csv(const std::vector<TraceRow>& trace) {
  std::string csv = "round,temperature,best_child_score,accepted,parent_score,best_ever_score\n";
  char line[256];
  for (const TraceRow& row : trace) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%d,%.17g,%.17g\n", row.round,
                  row.temperature, row.best_child_score, row.accepted ? 1 : 0,
                  row.parent_score, row.best_ever_score);
    csv += line;
  }
  return csv;
}

}  // namespace dcs
