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

#include <chrono>
#include <cmath>
#include <cstdio>

#include "dcs/errors.h"
#include "dcs/isomorphism.h"
#include "dcs/oracle.h"
#include "dcs/predictor.h"

using namespace dcs;

namespace {

std::string fake(const std::string& mode) { return std::string(FAKE_EVALUATOR) + " " + mode; }

MetaGraph sample_meta(std::uint64_t seed, const char* preset = "imagenet") {
  Rng rng(seed);
  return random_metagraph(preset_space(preset), rng);
}

}  // namespace

TEST_CASE("oracle spec strings") {
  CHECK(parse_oracle_spec("synthetic-a") == OracleSpec{OracleKind::kSyntheticA, 0, ""});
  CHECK(parse_oracle_spec("synthetic-b:17") == OracleSpec{OracleKind::kSyntheticB, 17, ""});
  CHECK(parse_oracle_spec("predictor:/tmp/m.bin").argument == "/tmp/m.bin");
  const OracleSpec ext = parse_oracle_spec("external:python3 eval.py --x 1:2");
  CHECK(ext.kind == OracleKind::kExternal);
  CHECK(ext.argument == "python3 eval.py --x 1:2");
  CHECK(parse_oracle_spec(to_string(ext)) == ext);
  for (const char* bad : {"synthetic-c", "synthetic-a:", "synthetic-a:-1", "synthetic-a:x",
                          "predictor", "external:", ""}) {
    CHECK_THROWS_AS(parse_oracle_spec(bad), std::invalid_argument);
  }
}

TEST_CASE("synthetic landscapes") {
  SyntheticOracle a(OracleKind::kSyntheticA, 0);
  SyntheticOracle b(OracleKind::kSyntheticB, 0);
  CHECK(a.thread_safe());
  CHECK_THROWS_AS(SyntheticOracle(OracleKind::kExternal, 0), std::invalid_argument);
  Rng rng(1);
  for (int trial = 0; trial < 60; ++trial) {
    const MetaGraph g = sample_meta(100 + trial);
    const double sa = a.evaluate(g);
    const double sb = b.evaluate(g);
    CHECK(sa >= 0.0);
    CHECK(sa <= 1.0);
    CHECK(sb >= 0.0);
    CHECK(sb <= 1.0);
    CHECK(a.evaluate(g) == sa);
    const int stage = static_cast<int>(uniform_index(rng, 4));
    const MetaGraph h =
        apply_permutation(g, stage, random_valid_permutation(g.cells[stage], rng));
    CHECK(a.evaluate(h) == sa);
    CHECK(b.evaluate(h) == sb);
    CHECK(synthetic_b_structure(h) == synthetic_b_structure(g));
  }
  const MetaGraph g = sample_meta(7);
  CHECK(synthetic_a_score(g, 1) != synthetic_a_score(g, 2));
}

TEST_CASE("synthetic-b structural term by hand") {
  MetaGraph m = single_cell_space(5);  // ops: conv1x1, dw3, dw5
  m.cells[0].add_edge(0, 1);
  m.cells[0].add_edge(1, 2);
  const double expected = (2.0 / 3 + 2.0 / 3 + std::log(2.0) / std::log(3.0)) / 3;
  CHECK(synthetic_b_structure(m) == doctest::Approx(expected).epsilon(1e-12));

  m.cells[0].add_edge(0, 3);
  // Active {1, 2, 3}, longest path still 2, all three operators present.
  CHECK(synthetic_b_structure(m) == doctest::Approx((1.0 + 2.0 / 3 + 1.0) / 3).epsilon(1e-12));
}

TEST_CASE("predictor oracle") {
  const MetaGraph g = sample_meta(3, "cifar10");
  const PredictorModel model({static_cast<int>(encoding_dimension(g)), 8, 1}, 2);
  const std::string path = "/tmp/dcs_oracle_test_model.bin";
  save_checkpoint(path, model);
  auto oracle = make_oracle(parse_oracle_spec("predictor:" + path));
  CHECK(oracle->thread_safe());
  CHECK(oracle->evaluate(g) == predict(model, g));
  CHECK_THROWS_AS(oracle->evaluate(sample_meta(3)), DimensionMismatch);
  std::remove(path.c_str());
}

TEST_CASE("external oracle round trip") {
  ExternalOracle oracle(fake("ok"), {1, 0.02});
  CHECK_FALSE(oracle.thread_safe());
  for (int i = 0; i < 5; ++i) {
    const MetaGraph g = sample_meta(20 + i, "cifar10");
    const double expected = to_unit(hash_bytes(canonical_key(g), 1));
    CHECK(oracle.evaluate(g) == expected);
  }
  oracle.close();
  oracle.close();
  CHECK_THROWS_AS(oracle.evaluate(sample_meta(1, "cifar10")), ExternalProtocolError);
}

TEST_CASE("external oracle protocol failures") {
  const MetaGraph g = sample_meta(5, "cifar10");
  for (const char* mode : {"noscore", "error", "badid", "garbage", "range", "die"}) {
    CAPTURE(mode);
    ExternalOracle oracle(fake(mode));
    CHECK_THROWS_AS(oracle.evaluate(g), ExternalProtocolError);
    // The child is gone; later calls fail fast.
    CHECK_THROWS_AS(oracle.evaluate(g), ExternalProtocolError);
  }
  try {
    ExternalOracle oracle(fake("error"));
    oracle.evaluate(g);
  } catch (const ExternalProtocolError& e) {
    CHECK(std::string(e.what()).find("out of memory") != std::string::npos);
  }
}

TEST_CASE("external oracle timeout") {
  ExternalOracle oracle(fake("hang"), {}, 0.3);
  const auto start = std::chrono::steady_clock::now();
  CHECK_THROWS_AS(oracle.evaluate(sample_meta(6, "cifar10")), ExternalProtocolError);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(5));
}

TEST_CASE("external oracle exit status") {
  ExternalOracle oracle(fake("exit7"));
  CHECK(oracle.evaluate(sample_meta(8, "cifar10")) >= 0.0);
  CHECK_THROWS_AS(oracle.close(), ExternalProtocolError);

  ExternalOracle missing("/nonexistent/evaluator");
  CHECK_THROWS_AS(missing.evaluate(sample_meta(8, "cifar10")), ExternalProtocolError);
}

TEST_CASE("external oracle arguments") {
  CHECK_THROWS_AS(ExternalOracle(fake("ok"), {0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(ExternalOracle(fake("ok"), {1, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(ExternalOracle(fake("ok"), {1, 0.5}, 0.0), std::invalid_argument);
}
