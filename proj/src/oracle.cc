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

#include "dcs/oracle.h"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "dcs/errors.h"
#include "dcs/isomorphism.h"
#include "dcs/random.h"
#include "dcs/serialization.h"

namespace dcs {

OracleSpec parse_oracle_spec(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view tail =
      colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  OracleSpec spec;
  if (head == "synthetic-a" || head == "synthetic-b") {
    spec.kind = head == "synthetic-a" ? OracleKind::kSyntheticA : OracleKind::kSyntheticB;
    if (colon != std::string_view::npos) {
      const std::string digits(tail);
      std::size_t used = 0;
      try {
        if (digits.empty() || digits.front() == '-') throw std::invalid_argument("sign");
        spec.salt = std::stoull(digits, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != digits.size()) {
        throw std::invalid_argument("bad oracle salt '" + digits + "'");
      }
    }
    return spec;
  }
  if (head == "predictor" || head == "external") {
    if (tail.empty()) {
      throw std::invalid_argument(std::string(head) + " oracle needs an argument after ':'");
    }
    spec.kind = head == "predictor" ? OracleKind::kPredictor : OracleKind::kExternal;
    spec.argument = std::string(tail);
    return spec;
  }
  throw std::invalid_argument("unknown oracle '" + std::string(text) +
                              "' (synthetic-a, synthetic-b, predictor:PATH, external:CMD)");
}

std::string to_string(const OracleSpec& spec) {
  switch (spec.kind) {
    case OracleKind::kSyntheticA: return "synthetic-a:" + std::to_string(spec.salt);
    case OracleKind::kSyntheticB: return "synthetic-b:" + std::to_string(spec.salt);
    case OracleKind::kPredictor: return "predictor:" + spec.argument;
    case OracleKind::kExternal: return "external:" + spec.argument;
  }
  return "?";
}

namespace {

constexpr std::uint64_t kEdgeTag = 0xed6e;
constexpr std::uint64_t kVertexTag = 0x7e47;
constexpr int kInputRole = 0;
constexpr int kOutputRole = 5;
constexpr int kMaxDegreeBucket = 4;

double keyed_weight(std::initializer_list<std::uint64_t> key) {
  return 2.0 * to_unit(derive_seed(key)) - 1.0;
}

int role(const CellGraph& cell, int v) {
  if (v == 0) return kInputRole;
  if (v == cell.output_vertex()) return kOutputRole;
  return 1 + static_cast<int>(cell.op(v));
}

// Relabeled to canonical order so float summation order is invariant too.
CellGraph canonical_cell(const CellGraph& cell) {
  return apply_permutation(cell, canonical_permutation(cell));
}

double keyed_noise(const MetaGraph& meta, std::uint64_t salt) {
  return to_unit(hash_bytes(canonical_key(meta), salt));
}

}  // namespace

double synthetic_a_score(const MetaGraph& meta, std::uint64_t salt) {
  double sum = 0.0;
  int terms = 0;
  for (std::size_t s = 0; s < meta.cells.size(); ++s) {
    const ActiveSubgraph sub = active_subgraph(canonical_cell(meta.cells[s]));
    const CellGraph& cell = sub.cell;
    const int out = cell.output_vertex();
    std::vector<int> indegree(cell.num_vertices(), 0);
    for (const Edge& e : cell.edges()) {
      if (e.to == out) continue;  // output inputs come from the feeder list
      ++indegree[e.to];
      sum += keyed_weight({salt, kEdgeTag, s, static_cast<std::uint64_t>(role(cell, e.from)),
                           static_cast<std::uint64_t>(role(cell, e.to))});
      ++terms;
    }
    for (int f : sub.output_feeders) {
      sum += keyed_weight({salt, kEdgeTag, s, static_cast<std::uint64_t>(role(cell, f)),
                           static_cast<std::uint64_t>(kOutputRole)});
      ++terms;
    }
    for (int v = 1; v < out; ++v) {
      if (!sub.active[v]) continue;
      const int bucket = std::min(indegree[v], kMaxDegreeBucket);
      sum += keyed_weight({salt, kVertexTag, static_cast<std::uint64_t>(cell.op(v)),
                           static_cast<std::uint64_t>(bucket)});
      ++terms;
    }
  }
  const double z = terms > 0 ? 2.0 * sum / std::sqrt(static_cast<double>(terms)) : 0.0;
  const double structure = 1.0 / (1.0 + std::exp(-z));
  return std::clamp(0.85 * structure + 0.15 * keyed_noise(meta, salt), 0.0, 1.0);
}

double synthetic_b_structure(const MetaGraph& meta) {
  if (meta.cells.empty()) return 0.0;
  double total = 0.0;
  for (const CellGraph& original : meta.cells) {
    const ActiveSubgraph sub = active_subgraph(canonical_cell(original));
    const CellGraph& cell = sub.cell;
    const int n = cell.num_intermediates();
    const int out = cell.output_vertex();

    // Longest input-to-leaf path, counted in edges, over the active DAG.
    std::vector<int> depth(cell.num_vertices(), -1);
    depth[0] = 0;
    for (const Edge& e : cell.edges()) {  // sorted by source, so sources settle first
      if (e.to == out || depth[e.from] < 0) continue;
      depth[e.to] = std::max(depth[e.to], depth[e.from] + 1);
    }
    int longest = 0;
    for (int f : sub.output_feeders) longest = std::max(longest, depth[f]);

    std::array<int, 4> counts{};
    for (int v = 1; v < out; ++v) {
      if (sub.active[v]) ++counts[static_cast<int>(cell.op(v))];
    }
    const int active = sub.num_active();
    double entropy = 0.0;
    for (int c : counts) {
      if (c == 0) continue;
      const double p = static_cast<double>(c) / active;
      entropy -= p * std::log(p);
    }
    const double max_entropy = std::log(static_cast<double>(std::min(4, n)));
    const double entropy_term = max_entropy > 0.0 ? entropy / max_entropy : 0.0;
    total += (static_cast<double>(active) / n + static_cast<double>(longest) / n +
              entropy_term) /
             3.0;
  }
  return total / static_cast<double>(meta.cells.size());
}

double synthetic_b_score(const MetaGraph& meta, std::uint64_t salt) {
  return std::clamp(0.5 * synthetic_b_structure(meta) + 0.5 * keyed_noise(meta, salt), 0.0,
                    1.0);
}

SyntheticOracle::SyntheticOracle(OracleKind kind, std::uint64_t salt)
    : kind_(kind), salt_(salt) {
  if (kind != OracleKind::kSyntheticA && kind != OracleKind::kSyntheticB) {
    throw std::invalid_argument("not a synthetic oracle kind");
  }
}

double SyntheticOracle::evaluate(const MetaGraph& meta) {
  return kind_ == OracleKind::kSyntheticA ? synthetic_a_score(meta, salt_)
                                          : synthetic_b_score(meta, salt_);
}

PredictorOracle::PredictorOracle(PredictorModel model) : model_(std::move(model)) {}

PredictorOracle PredictorOracle::from_checkpoint(const std::string& path) {
  return PredictorOracle(load_checkpoint(path));
}

double PredictorOracle::evaluate(const MetaGraph& meta) {
  return std::clamp(predict(model_, meta), 0.0, 1.0);
}

ExternalOracle::ExternalOracle(std::string command, TrainingBudget budget,
                               double timeout_seconds)
    : command_(std::move(command)), budget_(budget), timeout_(timeout_seconds) {
  if (budget_.epochs < 1) throw std::invalid_argument("budget epochs must be >= 1");
  if (!(budget_.data_fraction > 0.0 && budget_.data_fraction <= 1.0)) {
    throw std::invalid_argument("budget data fraction must be in (0, 1]");
  }
  if (!(timeout_ > 0.0)) throw std::invalid_argument("timeout must be positive");
  start();
}

ExternalOracle::~ExternalOracle() {
  try {
    close();
  } catch (const std::exception&) {
  }
}

void ExternalOracle::start() {
  // A dead child must surface as EPIPE, not kill this process.
  ::signal(SIGPIPE, SIG_IGN);
  int in[2];
  int out[2];
  if (::pipe2(in, O_CLOEXEC) != 0) throw ExternalProtocolError(std::strerror(errno));
  if (::pipe2(out, O_CLOEXEC) != 0) {
    ::close(in[0]);
    ::close(in[1]);
    throw ExternalProtocolError(std::strerror(errno));
  }
  const pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in[0], in[1], out[0], out[1]}) ::close(fd);
    throw ExternalProtocolError(std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::setpgid(0, 0);  // so a kill reaches whatever the shell spawns
    ::dup2(in[0], STDIN_FILENO);
    ::dup2(out[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in[0]);
  ::close(out[1]);
  pid_ = pid;
  to_child_ = in[1];
  from_child_ = out[0];
}

void ExternalOracle::kill_child() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    ::kill(-pid_, SIGKILL);
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
  }
  pid_ = -1;
}

void ExternalOracle::fail(const std::string& what) {
  kill_child();
  broken_ = true;
  throw ExternalProtocolError(what);
}

std::string ExternalOracle::read_line() {
  using Clock = std::chrono::steady_clock;
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(
                         std::chrono::duration<double>(timeout_));
  for (;;) {
    const auto newline = buffer_.find('\n');
    if (newline != std::string::npos) {
      std::string line = buffer_.substr(0, newline);
      buffer_.erase(0, newline + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - Clock::now());
    if (left.count() <= 0) fail("no reply within " + std::to_string(timeout_) + " s");
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      fail(std::string("poll: ") + std::strerror(errno));
    }
    if (ready == 0) continue;
    char chunk[4096];
    const ssize_t got = ::read(from_child_, chunk, sizeof chunk);
    if (got < 0) {
      if (errno == EINTR) continue;
      fail(std::string("read: ") + std::strerror(errno));
    }
    if (got == 0) {
      std::string how = "evaluator closed its output";
      int status = 0;
      for (int i = 0; i < 200; ++i) {
        if (::waitpid(pid_, &status, WNOHANG) == pid_) {
          pid_ = -1;
          if (WIFEXITED(status)) {
            how += " (exit status " + std::to_string(WEXITSTATUS(status)) + ")";
          }
          break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
      }
      fail(how);
    }
    buffer_.append(chunk, static_cast<std::size_t>(got));
  }
}

double ExternalOracle::evaluate(const MetaGraph& meta) {
  if (broken_ || pid_ < 0) throw ExternalProtocolError("evaluator is no longer running");
  const std::int64_t id = next_id_++;
  nlohmann::json request = {
      {"id", id},
      {"meta", to_json(meta)},
      {"budget", {{"epochs", budget_.epochs}, {"data_fraction", budget_.data_fraction}}}};
  const std::string line = request.dump() + "\n";
  std::size_t sent = 0;
  while (sent < line.size()) {
    const ssize_t n = ::write(to_child_, line.data() + sent, line.size() - sent);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(std::string("write: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }

  const std::string text = read_line();
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    fail("reply is not JSON: " + text.substr(0, 200));
  }
  if (!reply.is_object()) fail("reply is not an object");
  const auto rid = reply.find("id");
  if (rid == reply.end() || !rid->is_number_integer() || rid->get<std::int64_t>() != id) {
    fail("reply id does not match request " + std::to_string(id));
  }
  if (const auto err = reply.find("error"); err != reply.end()) {
    fail("evaluator error: " + (err->is_string() ? err->get<std::string>() : err->dump()));
  }
  const auto score = reply.find("score");
  if (score == reply.end()) fail("reply has no score");
  if (!score->is_number()) fail("score is not a number");
  const double value = score->get<double>();
  if (!(value >= 0.0 && value <= 1.0)) fail("score " + std::to_string(value) + " outside [0, 1]");
  return value;
}

void ExternalOracle::close() {
  if (pid_ < 0) {
    kill_child();
    return;
  }
  ::close(to_child_);
  to_child_ = -1;
  using Clock = std::chrono::steady_clock;
  const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                           std::chrono::duration<double>(timeout_));
  int status = 0;
  pid_t done = 0;
  while ((done = ::waitpid(pid_, &status, WNOHANG)) == 0 && Clock::now() < deadline) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  if (done == 0) fail("evaluator did not exit after its input closed");
  pid_ = -1;
  kill_child();
  if (done < 0) return;  // already reaped elsewhere
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    broken_ = true;
    throw ExternalProtocolError(
        WIFEXITED(status) ? "evaluator exited with status " + std::to_string(WEXITSTATUS(status))
                          : std::string("evaluator terminated by a signal"));
  }
}

std::unique_ptr<ScoreOracle> make_oracle(const OracleSpec& spec, const OracleOptions& options) {
  switch (spec.kind) {
    case OracleKind::kSyntheticA:
    case OracleKind::kSyntheticB:
      return std::make_unique<SyntheticOracle>(spec.kind, spec.salt);
    case OracleKind::kPredictor:
      return std::make_unique<PredictorOracle>(PredictorOracle::from_checkpoint(spec.argument));
    case OracleKind::kExternal:
      return std::make_unique<ExternalOracle>(spec.argument, options.budget,
                                              options.timeout_seconds);
  }
  throw std::invalid_argument("unknown oracle kind");
}

}  // namespace dcs
