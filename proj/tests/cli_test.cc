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
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dcs/cli.h"
#include "dcs/serialization.h"
#include "dcs/store.h"

using namespace dcs;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run dcs_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string tmp(const char* name) { return std::string("/tmp/dcs_cli_test_") + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool contains(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(dcs_run({}).code == kExitUsage);
  CHECK(dcs_run({"frobnicate"}).code == kExitUsage);
  const Run missing = dcs_run({"search", "--rounds", "3"});
  CHECK(missing.code == kExitUsage);
  CHECK(contains(missing.err, "--seed"));
  CHECK(dcs_run({"--help"}).code == kExitOk);
  CHECK(dcs_run({"search", "--seed", "1", "--strategy", "sa"}).code == kExitUsage);
}

TEST_CASE("resolve_space") {
  CHECK(resolve_space("imagenet").cells.size() == 4);
  CHECK(resolve_space("cifar10").cells.size() == 3);
  CHECK(resolve_space("cell:5").cells.front().num_vertices() == 5);
  const std::string path = tmp("space.json");
  MetaGraph m = single_cell_space(4);
  m.cells[0].add_edge(0, 1);
  save_metagraph(path, m);
  CHECK(resolve_space(path).cells[0].num_edges() == 0);
  std::remove(path.c_str());
  CHECK_THROWS(resolve_space("cell:x"));
}

TEST_CASE("search") {
  const std::vector<std::string> args{"search", "--space", "cifar10", "--rounds", "20",
                                      "--pop", "4", "--init-pop", "8", "--seed", "3"};
  const Run a = dcs_run(args);
  REQUIRE(a.code == kExitOk);
  CHECK(a.out.rfind("round,temperature,best_child_score,accepted,parent_score,best_ever_score\n",
                    0) == 0);
  CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 21);
  CHECK(contains(a.err, "strategy=mh-es"));
  CHECK(contains(a.err, "oracle_calls=88"));
  CHECK(dcs_run(args).out == a.out);

  const std::string best = tmp("best.json");
  std::vector<std::string> with_best = args;
  with_best.insert(with_best.end(), {"--best", best, "--strategy", "rs"});
  REQUIRE(dcs_run(with_best).code == kExitOk);
  CHECK(validate(load_metagraph(best)).ok());

  const std::string dot = tmp("best.dot");
  REQUIRE(dcs_run({"export-dot", best, "--out", dot}).code == kExitOk);
  CHECK(slurp(dot).rfind("digraph", 0) == 0);
  std::remove(best.c_str());
  std::remove(dot.c_str());
}

TEST_CASE("store workflow") {
  const std::string store = tmp("store.jsonl");
  const std::string augmented = tmp("augmented.jsonl");
  const std::string model = tmp("model.bin");
  for (const std::string& p : {store, augmented, model}) std::remove(p.c_str());

  const Run sampled = dcs_run({"sample", "--space", "cifar10", "-n", "40", "--seed", "2",
                               "--out", store, "--oracle", "synthetic-a"});
  REQUIRE(sampled.code == kExitOk);
  CHECK(store_load(store).size() == 40);

  const Run stats = dcs_run({"stats", "--store", store});
  CHECK(stats.code == kExitOk);
  CHECK(contains(stats.out, "records=40 classes=40"));
  CHECK(contains(stats.out, "measured=40"));

  REQUIRE(dcs_run({"augment", "--in", store, "--out", augmented, "--factor", "2", "--seed", "1"})
              .code == kExitOk);
  const auto records = store_load(augmented);
  CHECK(records.size() > 40);
  CHECK(records.size() <= 120);

  const Run trained = dcs_run({"train-predictor", "--store", store, "--checkpoint", model,
                               "--seed", "4", "--epochs", "3", "--hidden", "16", "16"});
  REQUIRE(trained.code == kExitOk);
  CHECK(contains(trained.out, "test_pairs=6"));
  CHECK(contains(trained.out, "kendall="));

  const std::string meta = tmp("meta.json");
  save_metagraph(meta, records.front().meta);
  const Run predicted = dcs_run({"predict", "--checkpoint", model, meta});
  REQUIRE(predicted.code == kExitOk);
  CHECK(predicted.out.rfind("path,score\n" + meta + ",", 0) == 0);

  const Run via_predictor = dcs_run({"search", "--space", "cifar10", "--rounds", "2", "--pop",
                                     "2", "--init-pop", "2", "--seed", "1", "--oracle",
                                     "predictor:" + model});
  CHECK(via_predictor.code == kExitOk);

  for (const std::string& p : {store, augmented, model, meta}) std::remove(p.c_str());
}

TEST_CASE("too few test classes") {
  const std::string store = tmp("tiny.jsonl");
  const std::string model = tmp("tiny.bin");
  std::remove(store.c_str());
  REQUIRE(dcs_run({"sample", "--space", "cifar10", "-n", "3", "--seed", "2", "--out", store})
              .code == kExitOk);
  const Run r = dcs_run({"train-predictor", "--store", store, "--checkpoint", model, "--seed",
                         "1", "--epochs", "1"});
  CHECK(r.code == kExitRuntimeError);
  CHECK(contains(r.err, "DegenerateVariance"));
  std::remove(store.c_str());
  std::remove(model.c_str());
}

TEST_CASE("enumerate and verify-mcmc") {
  const Run e = dcs_run({"enumerate", "--space", "cell:5", "--classes"});
  REQUIRE(e.code == kExitOk);
  CHECK(e.out == "vertices=5 subsets=1024 valid=896 classes=896\n");
  CHECK(dcs_run({"enumerate", "--space", "cell:7"}).code == kExitRuntimeError);

  const Run v = dcs_run({"verify-mcmc", "--space", "cell:4", "-T", "0.5", "--steps", "20000",
                         "--seed", "1"});
  REQUIRE(v.code == kExitOk);
  CHECK(v.out.rfind("state_hex,perf,pi_analytic,freq_empirical\n", 0) == 0);
  CHECK(std::count(v.out.begin(), v.out.end(), '\n') == 50);
  CHECK(dcs_run({"verify-mcmc", "--space", "cell:4", "-T", "0", "--seed", "1"}).code ==
        kExitRuntimeError);
}

TEST_CASE("search with an external evaluator") {
  const Run r = dcs_run({"search", "--space", "cifar10", "--rounds", "3", "--pop", "2",
                         "--init-pop", "2", "--seed", "1", "--oracle",
                         std::string("external:") + FAKE_EVALUATOR + " ok", "--epochs", "2",
                         "--data-fraction", "0.1"});
  REQUIRE(r.code == kExitOk);
  CHECK(contains(r.err, "oracle_calls=8"));
  std::istringstream rows(r.out);
  std::string line;
  std::getline(rows, line);
  while (std::getline(rows, line)) {
    const double best = std::stod(line.substr(line.rfind(',') + 1));
    CHECK(best >= 0.0);
    CHECK(best <= 1.0);
  }
  const Run broken = dcs_run({"search", "--space", "cifar10", "--rounds", "1", "--seed", "1",
                              "--oracle", std::string("external:") + FAKE_EVALUATOR + " garbage"});
  CHECK(broken.code == kExitRuntimeError);
  CHECK(contains(broken.err, "ExternalProtocolError"));
}
