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

// Scorers mapping a valid meta-graph to [0, 1].
//
// Spec strings accepted by parse_oracle_spec:
//   synthetic-a[:salt]   synthetic-b[:salt]   predictor:<checkpoint>
//   external:<shell command>

#ifndef DCS_ORACLE_H_
#define DCS_ORACLE_H_

#include <sys/types.h>

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "dcs/metagraph.h"
#include "dcs/predictor.h"
#include "dcs/search.h"

namespace dcs {

enum class OracleKind { kSyntheticA, kSyntheticB, kPredictor, kExternal };

struct OracleSpec {
  OracleKind kind = OracleKind::kSyntheticA;
  std::uint64_t salt = 0;
  std::string argument;  // checkpoint path or command line

  bool operator==(const OracleSpec&) const = default;
};

// Throws std::invalid_argument.
OracleSpec parse_oracle_spec(std::string_view text);
std::string to_string(const OracleSpec& spec);

// Isomorphism-invariant landscape with learnable structure: a sum of keyed
// weights over active edges (by operator role of both ends) and active
// vertices (by operator and capped in-degree), squashed to (0, 1), mixed
// 0.85 / 0.15 with noise keyed by the canonical key.
double synthetic_a_score(const MetaGraph& meta, std::uint64_t salt = 0);

// Mean over cells of (active fraction + longest input-to-leaf path fraction +
// normalized operator entropy) / 3.
double synthetic_b_structure(const MetaGraph& meta);
// 0.5 * structure + 0.5 * canonical-keyed noise, clipped to [0, 1].
double synthetic_b_score(const MetaGraph& meta, std::uint64_t salt = 0);

class SyntheticOracle : public ScoreOracle {
 public:
  // kind must be kSyntheticA or kSyntheticB.
  SyntheticOracle(OracleKind kind, std::uint64_t salt);
  double evaluate(const MetaGraph& meta) override;
  bool thread_safe() const override { return true; }

 private:
  OracleKind kind_;
  std::uint64_t salt_;
};

class PredictorOracle : public ScoreOracle {
 public:
  explicit PredictorOracle(PredictorModel model);
  // Throws IoError, SchemaError.
  static PredictorOracle from_checkpoint(const std::string& path);
  // Throws DimensionMismatch; clipped to [0, 1].
  double evaluate(const MetaGraph& meta) override;
  bool thread_safe() const override { return true; }

 private:
  PredictorModel model_;
};

struct TrainingBudget {
  int epochs = 15;
  double data_fraction = 0.5;
};

inline constexpr double kDefaultExternalTimeout = 600.0;  // seconds

// Runs `/bin/sh -c command` and talks newline-delimited JSON over its stdin
// and stdout:
//   request  {"id": n, "meta": <document>, "budget": {"epochs", "data_fraction"}}
//   reply    {"id": n, "score": x} or {"id": n, "error": "..."}
// Any protocol failure kills the child and makes later calls fail. Not
// thread-safe; one request is in flight at a time.
class ExternalOracle : public ScoreOracle {
 public:
  ExternalOracle(std::string command, TrainingBudget budget = {},
                 double timeout_seconds = kDefaultExternalTimeout);
  ~ExternalOracle() override;
  ExternalOracle(const ExternalOracle&) = delete;
  ExternalOracle& operator=(const ExternalOracle&) = delete;

  // Throws ExternalProtocolError.
  double evaluate(const MetaGraph& meta) override;
  // Closes the child's stdin and waits for it. Throws ExternalProtocolError
  // on a nonzero exit status. Idempotent.
  void close();

 private:
  void start();
  [[noreturn]] void fail(const std::string& what);
  std::string read_line();
  void kill_child();

  std::string command_;
  TrainingBudget budget_;
  double timeout_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::int64_t next_id_ = 0;
  bool broken_ = false;
};

struct OracleOptions {
  TrainingBudget budget;
  double timeout_seconds = kDefaultExternalTimeout;
};

std::unique_ptr<ScoreOracle> make_oracle(const OracleSpec& spec,
                                         const OracleOptions& options = {});

}  // namespace dcs

#endif  // DCS_ORACLE_H_
