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

#include "dcs/cli.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include <CLI11.hpp>

#include "dcs/enumerate.h"
#include "dcs/errors.h"
#include "dcs/isomorphism.h"
#include "dcs/mcmc.h"
#include "dcs/oracle.h"
#include "dcs/pipeline.h"
#include "dcs/predictor.h"
#include "dcs/search.h"
#include "dcs/serialization.h"
#include "dcs/store.h"

namespace dcs {

MetaGraph resolve_space(const std::string& name) {
  MetaGraph space;
  if (name == "imagenet" || name == "cifar10") {
    space = preset_space(name);
  } else if (name.rfind("cell:", 0) == 0) {
    std::size_t used = 0;
    int n = 0;
    try {
      n = std::stoi(name.substr(5), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != name.size() - 5) {
      throw std::invalid_argument("bad space '" + name + "' (expected cell:N)");
    }
    space = single_cell_space(n);
  } else {
    space = load_metagraph(name);
  }
  for (CellGraph& cell : space.cells) cell = CellGraph(cell.num_vertices(), cell.ops(), {});
  return space;
}

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::string format(const char* fmt, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, a);
  return buf;
}

struct OracleFlags {
  std::string spec = "synthetic-a";
  int epochs = TrainingBudget{}.epochs;
  double data_fraction = TrainingBudget{}.data_fraction;
  double timeout = kDefaultExternalTimeout;

  void add_to(CLI::App* app, const std::string& fallback) {
    spec = fallback;
    app->add_option("--oracle", spec,
                    "synthetic-a[:salt], synthetic-b[:salt], predictor:PATH or external:CMD")
        ->capture_default_str();
    app->add_option("--epochs", epochs, "External oracle training epochs")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--data-fraction", data_fraction, "External oracle data fraction")
        ->capture_default_str()
        ->check(CLI::Range(1e-9, 1.0));
    app->add_option("--timeout", timeout, "External oracle per-request timeout in seconds")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  }

  std::unique_ptr<ScoreOracle> make() const {
    OracleOptions options;
    options.budget = {epochs, data_fraction};
    options.timeout_seconds = timeout;
    return make_oracle(parse_oracle_spec(spec), options);
  }
};

void finish(ScoreOracle& oracle) {
  if (auto* external = dynamic_cast<ExternalOracle*>(&oracle)) external->close();
}

struct SampleCmd {
  std::string space = "imagenet";
  int n = 0;
  std::uint64_t seed = 0;
  std::string out;
  double edge_probability = kDefaultEdgeProbability;
  OracleFlags oracle;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("sample", "Sample random meta-graphs, score them, append to a store");
    sub->add_option("--space", space, "imagenet, cifar10, cell:N or a template file")
        ->capture_default_str();
    sub->add_option("-n,--n", n, "Number of distinct architectures")->required()->check(
        CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Random seed")->required();
    sub->add_option("--out", out, "Store to append to (JSONL)")->required();
    sub->add_option("--edge-prob", edge_probability, "Per-slot inclusion probability")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    oracle.add_to(sub, "synthetic-a");
  }

  void run(std::ostream& out_stream) const {
    const std::vector<MetaGraph> metas =
        sample_random(resolve_space(space), n, seed, edge_probability);
    auto scorer = oracle.make();
    const std::vector<ArchRecord> records = measure(metas, *scorer, seed);
    finish(*scorer);
    store_append(out, records);
    out_stream << "appended " << records.size() << " records to " << out << "\n";
  }
};

struct AugmentCmd {
  std::string in;
  std::string out;
  int factor = kDefaultAugmentFactor;
  std::uint64_t seed = 0;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("augment", "Add isomorphic relabelings of measured records");
    sub->add_option("--in", in, "Input store")->required();
    sub->add_option("--out", out, "Output store (appended)")->required();
    sub->add_option("--factor", factor, "Variants per measured record")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", seed, "Random seed")->required();
  }

  void run(std::ostream& out_stream) const {
    const std::vector<ArchRecord> records = store_load(in);
    std::vector<ArchRecord> result = records;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].source != RecordSource::kMeasured) continue;
      for (ArchRecord& v : augment(records[i], factor, derive_seed({seed, i}))) {
        result.push_back(std::move(v));
      }
    }
    store_append(out, result);
    out_stream << "wrote " << result.size() << " records (" << result.size() - records.size()
               << " augmented) to " << out << "\n";
  }
};

struct TrainCmd {
  std::string store;
  std::string checkpoint;
  std::uint64_t seed = 0;
  int augment_factor = kDefaultAugmentFactor;
  TrainConfig cfg;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("train-predictor",
                                   "Train the MLP predictor on a store and report test ranking");
    sub->add_option("--store", store, "Architecture store")->required();
    sub->add_option("--checkpoint", checkpoint, "Checkpoint output path")->required();
    sub->add_option("--seed", seed, "Seed for the split, augmentation and training")->required();
    sub->add_option("--augment", augment_factor, "Augmentation factor for the training side")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--epochs", cfg.epochs)->capture_default_str();
    sub->add_option("--batch-size", cfg.batch_size)->capture_default_str();
    sub->add_option("--lr", cfg.learning_rate)->capture_default_str();
    sub->add_option("--weight-decay", cfg.weight_decay)->capture_default_str();
    sub->add_option("--momentum", cfg.momentum)->capture_default_str();
    sub->add_option("--schedule", cfg.schedule)
        ->capture_default_str()
        ->check(CLI::IsMember({"cosine", "constant"}));
    sub->add_option("--hidden", cfg.hidden, "Hidden layer widths")->capture_default_str();
  }

  void run(std::ostream& out_stream) {
    const DatasetSplit split = build_dataset(store_load(store), augment_factor, seed);
    TrainConfig c = cfg;
    c.seed = seed;
    const PredictorModel model = train(split.train, c);
    save_checkpoint(checkpoint, model);
    out_stream << "train_pairs=" << split.train.size() << " test_pairs=" << split.test.size()
               << " train_classes=" << split.train_classes
               << " test_classes=" << split.test_classes << "\n";
    if (split.test.size() < 2) {
      double mse = std::nan("");
      if (split.test.size() == 1) {
        const double d = predict_all(model, split.test)[0] - split.test.targets[0];
        mse = d * d;
      }
      throw DegenerateVariance("fewer than 2 test pairs", mse);
    }
    const RankingMetrics m = ranking_metrics(model, split.test);
    out_stream << "pearson=" << format("%.6f", m.pearson)
               << " kendall=" << format("%.6f", m.kendall) << " mse=" << format("%.6g", m.mse)
               << "\n";
  }
};

struct PredictCmd {
  std::string checkpoint;
  std::vector<std::string> metas;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("predict", "Score meta-graph documents with a checkpoint");
    sub->add_option("--checkpoint", checkpoint, "Predictor checkpoint")->required();
    sub->add_option("meta", metas, "Meta-graph document(s)")->required();
  }

  void run(std::ostream& out_stream) const {
    const PredictorModel model = load_checkpoint(checkpoint);
    out_stream << "path,score\n";
    for (const std::string& path : metas) {
      out_stream << path << "," << format("%.17g", predict(model, load_metagraph(path)))
                 << "\n";
    }
  }
};

struct SearchCmd {
  std::string space = "imagenet";
  std::string strategy = "mh-es";
  SearchConfig cfg;
  std::string trace;
  std::string best;
  OracleFlags oracle;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("search", "Run MH-ES or a baseline strategy against an oracle");
    sub->add_option("--space", space, "imagenet, cifar10, cell:N or a template file")
        ->capture_default_str();
    sub->add_option("--strategy", strategy)
        ->capture_default_str()
        ->check(CLI::IsMember({"mh-es", "es", "ls", "rs"}));
    sub->add_option("--rounds", cfg.rounds, "R")->capture_default_str();
    sub->add_option("--pop", cfg.population, "P, children per round")->capture_default_str();
    sub->add_option("--init-pop", cfg.initial_population, "P0, random initial population")
        ->capture_default_str();
    sub->add_option("--t0", cfg.t0, "Initial temperature (inf allowed)")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "Random seed")->required();
    sub->add_option("--workers", cfg.workers, "Evaluation threads for thread-safe oracles")
        ->capture_default_str();
    sub->add_option("--edge-prob", cfg.edge_probability, "Random-cell slot probability")
        ->capture_default_str();
    sub->add_option("--trace", trace, "Trace CSV path (default: stdout)");
    sub->add_option("--best", best, "Write the best meta-graph document here");
    oracle.add_to(sub, "synthetic-b");
  }

  void run(std::ostream& out_stream, std::ostream& err_stream) {
    cfg.strategy = parse_strategy(strategy);
    auto scorer = oracle.make();
    const SearchResult result = run_search(cfg, *scorer, resolve_space(space));
    finish(*scorer);
    const std::string csv = trace_to_csv(result.trace);
    if (trace.empty()) {
      out_stream << csv;
    } else {
      write_text(trace, csv);
    }
    if (!best.empty()) save_metagraph(best, result.best);
    err_stream << "strategy=" << strategy << " best_score=" << format("%.17g", result.best_score)
               << " oracle_calls=" << result.oracle_calls
               << " canon=" << canonical_key(result.best) << "\n";
  }
};

struct EnumerateCmd {
  std::string space = "cell:5";
  bool classes = false;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("enumerate", "Exhaustively enumerate a small single-cell space");
    sub->add_option("--space", space, "cell:N (N <= 6) or a single-cell template file")
        ->capture_default_str();
    sub->add_flag("--classes", classes, "Also count isomorphism classes");
  }

  void run(std::ostream& out_stream) const {
    const MetaGraph shape = resolve_space(space);
    const Enumeration e = enumerate_space(shape, classes);
    out_stream << "vertices=" << shape.cells.front().num_vertices()
               << " subsets=" << e.subsets_examined << " valid=" << e.valid.size();
    if (e.num_classes) out_stream << " classes=" << *e.num_classes;
    out_stream << "\n";
  }
};

struct VerifyMcmcCmd {
  std::string space = "cell:5";
  ChainSpec chain;
  std::string out;
  OracleFlags oracle;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand(
        "verify-mcmc", "Compare a Metropolis chain with its analytic stationary distribution");
    sub->add_option("--space", space, "cell:N (N <= 6) or a single-cell template file")
        ->capture_default_str();
    sub->add_option("-T,--temperature", chain.temperature)->capture_default_str();
    sub->add_option("--steps", chain.steps)->capture_default_str();
    sub->add_option("--burn-in", chain.burn_in)->capture_default_str();
    sub->add_option("--seed", chain.seed, "Random seed")->required();
    sub->add_option("--out", out, "Report CSV path (default: stdout)");
    oracle.add_to(sub, "synthetic-a");
  }

  void run(std::ostream& out_stream) const {
    auto scorer = oracle.make();
    const StateSpace states = enumerate_state_space(
        resolve_space(space), [&](const MetaGraph& m) { return scorer->evaluate(m); });
    finish(*scorer);
    const std::string csv = diagnostics_csv(states, chain_diagnostics(states, chain));
    if (out.empty()) {
      out_stream << csv;
    } else {
      write_text(out, csv);
    }
  }
};

struct ExportDotCmd {
  std::string meta;
  std::string out;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("export-dot", "Render a meta-graph document as Graphviz DOT");
    sub->add_option("meta", meta, "Meta-graph document")->required();
    sub->add_option("--out", out, "Output path (default: stdout)");
  }

  void run(std::ostream& out_stream) const {
    const std::string dot = to_dot(load_metagraph(meta));
    if (out.empty()) {
      out_stream << dot;
    } else {
      write_text(out, dot);
    }
  }
};

struct StatsCmd {
  std::string store;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("stats", "Summarize an architecture store");
    sub->add_option("--store", store, "Architecture store")->required();
  }

  void run(std::ostream& out_stream) const {
    const std::vector<ArchRecord> records = store_load(store);
    std::map<std::string, std::size_t> by_source;
    std::set<std::string> classes;
    double lo = 1.0;
    double hi = 0.0;
    double sum = 0.0;
    for (const ArchRecord& r : records) {
      ++by_source[std::string(to_string(r.source))];
      classes.insert(r.canon);
      lo = std::min(lo, r.perf);
      hi = std::max(hi, r.perf);
      sum += r.perf;
    }
    out_stream << "records=" << records.size() << " classes=" << classes.size() << "\n";
    for (const auto& [source, count] : by_source) out_stream << source << "=" << count << "\n";
    if (!records.empty()) {
      out_stream << "perf_min=" << format("%.6f", lo)
                 << " perf_mean=" << format("%.6f", sum / static_cast<double>(records.size()))
                 << " perf_max=" << format("%.6f", hi) << "\n";
    }
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dense-connectivity architecture search toolkit", "dcs"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  SampleCmd sample;
  AugmentCmd augment_cmd;
  TrainCmd train_cmd;
  PredictCmd predict_cmd;
  SearchCmd search;
  EnumerateCmd enumerate;
  VerifyMcmcCmd verify;
  ExportDotCmd dot;
  StatsCmd stats;
  sample.add(app);
  augment_cmd.add(app);
  train_cmd.add(app);
  predict_cmd.add(app);
  search.add(app);
  enumerate.add(app);
  verify.add(app);
  dot.add(app);
  stats.add(app);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto chosen = app.get_subcommands();
    err << (chosen.empty() ? app.help() : chosen.front()->help());
    return kExitUsage;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "sample") sample.run(out);
    else if (name == "augment") augment_cmd.run(out);
    else if (name == "train-predictor") train_cmd.run(out);
    else if (name == "predict") predict_cmd.run(out);
    else if (name == "search") search.run(out, err);
    else if (name == "enumerate") enumerate.run(out);
    else if (name == "verify-mcmc") verify.run(out);
    else if (name == "export-dot") dot.run(out);
    else if (name == "stats") stats.run(out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  return kExitOk;
}

}  // namespace dcs
