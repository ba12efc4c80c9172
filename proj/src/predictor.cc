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

#include "dcs/predictor.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "dcs/random.h"

namespace dcs {

std::vector<double> encode_features(const MetaGraph& meta) {
  const std::vector<std::uint8_t> bits = encode(meta);
  return std::vector<double>(bits.begin(), bits.end());
}

void Dataset::add(std::vector<double> x, double y) {
  if (!inputs.empty() && x.size() != inputs.front().size()) {
    throw DimensionMismatch("sample has dimension " + std::to_string(x.size()) +
                            ", dataset has " + std::to_string(inputs.front().size()));
  }
  if (!(y >= 0.0 && y <= 1.0)) {
    throw std::invalid_argument("performance " + std::to_string(y) + " outside [0, 1]");
  }
  inputs.push_back(std::move(x));
  targets.push_back(y);
}

void Dataset::add(const MetaGraph& meta, double y) { add(encode_features(meta), y); }

// ---------------------------------------------------------------------------

PredictorModel::PredictorModel(const std::vector<int>& widths, std::uint64_t seed,
                               Activation hidden_activation_, OutputHead head_)
    : hidden_activation(hidden_activation_), head(head_) {
  if (widths.size() < 2 || widths.back() != 1) {
    throw std::invalid_argument("widths must be {input, hidden..., 1}");
  }
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int in = widths[l], out = widths[l + 1];
    if (in < 1 || out < 1) throw std::invalid_argument("layer widths must be >= 1");
    const double bound = std::sqrt(6.0 / in);
    Eigen::MatrixXd w(out, in);
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) w(r, c) = bound * (2.0 * uniform01(rng) - 1.0);
    }
    weights.push_back(std::move(w));
    biases.push_back(Eigen::VectorXd::Zero(out));
  }
}

int PredictorModel::input_dimension() const {
  return weights.empty() ? 0 : static_cast<int>(weights.front().cols());
}

std::vector<int> PredictorModel::widths() const {
  std::vector<int> w;
  if (weights.empty()) return w;
  w.push_back(static_cast<int>(weights.front().cols()));
  for (const auto& m : weights) w.push_back(static_cast<int>(m.rows()));
  return w;
}

std::size_t PredictorModel::num_parameters() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

bool PredictorModel::operator==(const PredictorModel& other) const {
  if (weights.size() != other.weights.size() ||
      hidden_activation != other.hidden_activation || head != other.head) {
    return false;
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != other.weights[l].rows() ||
        weights[l].cols() != other.weights[l].cols() ||
        weights[l] != other.weights[l] || biases[l] != other.biases[l]) {
      return false;
    }
  }
  return true;
}

bool PredictorModel::all_finite() const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

namespace {

Eigen::MatrixXd to_matrix(const Dataset& data, std::span<const std::size_t> rows) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(data.dimension()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& src = data.inputs[rows[i]];
    for (std::size_t j = 0; j < src.size(); ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = src[j];
    }
  }
  return x;
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

// Forward pass keeping every layer's pre-activation and activation.
struct Activations {
  std::vector<Eigen::MatrixXd> pre;   // z_l
  std::vector<Eigen::MatrixXd> post;  // a_l, post[0] is the input
};

Activations run_forward(const PredictorModel& m, const Eigen::MatrixXd& x) {
  Activations acts;
  acts.post.push_back(x);
  const std::size_t layers = m.weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = acts.post.back() * m.weights[l].transpose();
    z.rowwise() += m.biases[l].transpose();
    Eigen::MatrixXd a;
    if (l + 1 < layers) {
      a = m.hidden_activation == Activation::kRelu ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
    } else {
      a = m.head == OutputHead::kSigmoid
              ? Eigen::MatrixXd((1.0 + (-z.array()).exp()).inverse().matrix())
              : z;
    }
    acts.pre.push_back(std::move(z));
    acts.post.push_back(std::move(a));
  }
  return acts;
}

void check_dimension(const PredictorModel& model, Eigen::Index cols) {
  if (cols != model.input_dimension()) {
    throw DimensionMismatch("input has dimension " + std::to_string(cols) +
                            ", model expects " + std::to_string(model.input_dimension()));
  }
}

}  // namespace

Eigen::VectorXd PredictorModel::forward_batch(const Eigen::MatrixXd& x) const {
  check_dimension(*this, x.cols());
  return run_forward(*this, x).post.back().col(0);
}

double PredictorModel::forward(std::span<const double> x) const {
  check_dimension(*this, static_cast<Eigen::Index>(x.size()));
  Eigen::MatrixXd row(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) row(0, static_cast<Eigen::Index>(j)) = x[j];
  return forward_batch(row)(0);
}

double PredictorModel::loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            Gradients* grads) const {
  check_dimension(*this, x.cols());
  const Activations acts = run_forward(*this, x);
  const Eigen::VectorXd residual = acts.post.back().col(0) - y;
  const double n = static_cast<double>(x.rows());
  const double value = residual.squaredNorm() / n;
  if (grads == nullptr) return value;

  const std::size_t layers = weights.size();
  grads->weights.resize(layers);
  grads->biases.resize(layers);
  // dL/da at the output, then through the head.
  Eigen::MatrixXd delta = (2.0 / n) * residual;
  if (head == OutputHead::kSigmoid) {
    const Eigen::ArrayXd s = acts.post.back().col(0).array();
    delta = (delta.array() * s * (1.0 - s)).matrix();
  }
  for (std::size_t l = layers; l-- > 0;) {
    grads->weights[l] = delta.transpose() * acts.post[l];
    grads->biases[l] = delta.colwise().sum().transpose();
    if (l == 0) break;
    delta = delta * weights[l];
    if (hidden_activation == Activation::kRelu) {
      delta = (delta.array() * (acts.pre[l - 1].array() > 0.0).cast<double>()).matrix();
    }
  }
  return value;
}

// ---------------------------------------------------------------------------

void TrainConfig::check() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight decay must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw std::invalid_argument("momentum must be in [0, 1)");
  }
  if (schedule != "cosine" && schedule != "constant") {
    throw std::invalid_argument("schedule must be 'cosine' or 'constant'");
  }
}

double scheduled_learning_rate(const TrainConfig& cfg, int epoch) {
  if (cfg.schedule == "constant") return cfg.learning_rate;
  return cfg.learning_rate * 0.5 *
         (1.0 + std::cos(std::numbers::pi * static_cast<double>(epoch) / cfg.epochs));
}

PredictorModel train(const Dataset& data, const TrainConfig& cfg, TrainReport* report) {
  cfg.check();
  if (data.empty()) throw EmptyDataset("no training pairs");
  std::vector<int> widths{static_cast<int>(data.dimension())};
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(1);
  return train_from(PredictorModel(widths, derive_seed({cfg.seed, 0x1a17})), data, cfg,
                    report);
}

PredictorModel train_from(PredictorModel model, const Dataset& data,
                          const TrainConfig& cfg, TrainReport* report) {
  cfg.check();
  if (data.empty()) throw EmptyDataset("no training pairs");
  check_dimension(model, static_cast<Eigen::Index>(data.dimension()));
  for (const auto& x : data.inputs) {
    if (x.size() != data.dimension()) throw DimensionMismatch("ragged dataset");
  }

  const std::size_t layers = model.weights.size();
  Gradients velocity;
  for (std::size_t l = 0; l < layers; ++l) {
    velocity.weights.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(),
                                                     model.weights[l].cols()));
    velocity.biases.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
  }
  const Eigen::MatrixXd x_all = to_matrix(data, all_rows(data.size()));
  const Eigen::VectorXd y_all =
      Eigen::Map<const Eigen::VectorXd>(data.targets.data(),
                                        static_cast<Eigen::Index>(data.size()));

  std::vector<std::size_t> order = all_rows(data.size());
  Gradients grads;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(derive_seed({cfg.seed, 0x5b0f, static_cast<std::uint64_t>(epoch)}));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[uniform_index(rng, i)]);
    }
    const double lr = scheduled_learning_rate(cfg, epoch);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const auto rows = static_cast<Eigen::Index>(end - start);
      Eigen::MatrixXd xb(rows, x_all.cols());
      Eigen::VectorXd yb(rows);
      for (Eigen::Index i = 0; i < rows; ++i) {
        xb.row(i) = x_all.row(static_cast<Eigen::Index>(order[start + i]));
        yb(i) = y_all(static_cast<Eigen::Index>(order[start + i]));
      }
      epoch_loss += model.loss(xb, yb, &grads);
      ++batches;
      for (std::size_t l = 0; l < layers; ++l) {
        velocity.weights[l] = cfg.momentum * velocity.weights[l] + grads.weights[l] +
                              cfg.weight_decay * model.weights[l];
        velocity.biases[l] = cfg.momentum * velocity.biases[l] + grads.biases[l] +
                             cfg.weight_decay * model.biases[l];
        model.weights[l] -= lr * velocity.weights[l];
        model.biases[l] -= lr * velocity.biases[l];
      }
    }
    if (!model.all_finite()) {
      throw std::runtime_error("training diverged: non-finite parameters after epoch " +
                               std::to_string(epoch));
    }
    if (report) report->epoch_loss.push_back(epoch_loss / batches);
  }
  return model;
}

double predict(const PredictorModel& model, const MetaGraph& meta) {
  return model.forward(encode_features(meta));
}

std::vector<double> predict_all(const PredictorModel& model, const Dataset& data) {
  if (data.empty()) return {};
  const Eigen::VectorXd out = model.forward_batch(to_matrix(data, all_rows(data.size())));
  return std::vector<double>(out.data(), out.data() + out.size());
}

// ---------------------------------------------------------------------------

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

double kendall_tau_b(std::span<const double> a, std::span<const double> b) {
  long long concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double da = a[i] - a[j], db = b[i] - b[j];
      if (da == 0.0 && db == 0.0) continue;
      if (da == 0.0) {
        ++ties_a;
      } else if (db == 0.0) {
        ++ties_b;
      } else if ((da > 0) == (db > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double n1 = static_cast<double>(concordant + discordant + ties_a);
  const double n2 = static_cast<double>(concordant + discordant + ties_b);
  return static_cast<double>(concordant - discordant) / std::sqrt(n1 * n2);
}

RankingMetrics ranking_metrics(std::span<const double> predicted,
                               std::span<const double> truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("prediction and truth sizes differ");
  }
  if (predicted.size() < 2) throw std::invalid_argument("need at least 2 pairs");
  RankingMetrics m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    m.mse += (predicted[i] - truth[i]) * (predicted[i] - truth[i]);
  }
  m.mse /= static_cast<double>(truth.size());
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  if (constant(predicted) || constant(truth)) {
    throw DegenerateVariance(constant(truth) ? "true performance is constant"
                                             : "predictions are constant",
                             m.mse);
  }
  m.pearson = pearson_correlation(predicted, truth);
  m.kendall = kendall_tau_b(predicted, truth);
  return m;
}

RankingMetrics ranking_metrics(const PredictorModel& model, const Dataset& test) {
  if (test.size() < 2) throw std::invalid_argument("need at least 2 test pairs");
  const std::vector<double> pred = predict_all(model, test);
  return ranking_metrics(pred, test.targets);
}

double gradient_check(const PredictorModel& model, std::span<const double> x, double y,
                      double floor) {
  check_dimension(model, static_cast<Eigen::Index>(x.size()));
  Eigen::MatrixXd xm(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) xm(0, static_cast<Eigen::Index>(j)) = x[j];
  Eigen::VectorXd ym(1);
  ym(0) = y;

  Gradients analytic;
  model.loss(xm, ym, &analytic);
  PredictorModel probe = model;
  // Balances truncation against rounding error for central differences.
  const double kStep = std::cbrt(std::numeric_limits<double>::epsilon());
  double worst = 0.0;
  auto compare = [&](double& param, double grad) {
    const double saved = param;
    const double h = kStep * std::max(1.0, std::abs(saved));
    param = saved + h;
    const double up = probe.loss(xm, ym);
    param = saved - h;
    const double down = probe.loss(xm, ym);
    param = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(grad), std::abs(numeric), floor});
    worst = std::max(worst, std::abs(grad - numeric) / denom);
  };
  for (std::size_t l = 0; l < probe.weights.size(); ++l) {
    for (Eigen::Index i = 0; i < probe.weights[l].size(); ++i) {
      compare(probe.weights[l].data()[i], analytic.weights[l].data()[i]);
    }
    for (Eigen::Index i = 0; i < probe.biases[l].size(); ++i) {
      compare(probe.biases[l].data()[i], analytic.biases[l].data()[i]);
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'D', 'C', 'S', 'M', 'L', 'P', '\0', '\1'};
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof value);
  if (!in) throw SchemaError("truncated checkpoint");
  return value;
}

}  // namespace

void save_checkpoint(const std::string& path, const PredictorModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.write(kMagic, sizeof kMagic);
  write_pod(out, kCheckpointVersion);
  write_pod(out, static_cast<std::uint32_t>(model.hidden_activation));
  write_pod(out, static_cast<std::uint32_t>(model.head));
  write_pod(out, static_cast<std::uint32_t>(model.weights.size()));
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    const auto& w = model.weights[l];
    write_pod(out, static_cast<std::uint32_t>(w.rows()));
    write_pod(out, static_cast<std::uint32_t>(w.cols()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) write_pod(out, w(r, c));
    }
    for (Eigen::Index r = 0; r < w.rows(); ++r) write_pod(out, model.biases[l](r));
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

PredictorModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw SchemaError("'" + path + "' is not a predictor checkpoint");
  }
  if (read_pod<std::uint32_t>(in) != kCheckpointVersion) {
    throw SchemaError("unsupported checkpoint version");
  }
  PredictorModel model;
  const auto act = read_pod<std::uint32_t>(in);
  const auto head = read_pod<std::uint32_t>(in);
  if (act > 1 || head > 1) throw SchemaError("unknown activation or head");
  model.hidden_activation = static_cast<Activation>(act);
  model.head = static_cast<OutputHead>(head);
  const auto layers = read_pod<std::uint32_t>(in);
  if (layers == 0 || layers > 64) throw SchemaError("implausible layer count");
  for (std::uint32_t l = 0; l < layers; ++l) {
    const auto rows = read_pod<std::uint32_t>(in);
    const auto cols = read_pod<std::uint32_t>(in);
    if (rows == 0 || cols == 0 || rows > (1u << 20) || cols > (1u << 20)) {
      throw SchemaError("implausible layer shape");
    }
    if (!model.weights.empty() && model.weights.back().rows() != cols) {
      throw SchemaError("layer shapes do not chain");
    }
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = read_pod<double>(in);
    }
    Eigen::VectorXd b(rows);
    for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = read_pod<double>(in);
    model.weights.push_back(std::move(w));
    model.biases.push_back(std::move(b));
  }
  if (model.weights.back().rows() != 1) throw SchemaError("output layer must be scalar");
  return model;
}

}  // namespace dcs
