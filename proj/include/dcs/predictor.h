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

// MLP surrogate mapping an encoded meta-graph to predicted performance, its
// SGD trainer, ranking metrics and a finite-difference gradient check.

#ifndef DCS_PREDICTOR_H_
#define DCS_PREDICTOR_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcs/metagraph.h"

namespace dcs {

enum class Activation : std::uint32_t { kRelu = 0, kIdentity = 1 };
enum class OutputHead : std::uint32_t { kSigmoid = 0, kIdentity = 1 };

enum class Split { kTrain, kTest };

struct Dataset {
  std::vector<std::vector<double>> inputs;
  std::vector<double> targets;
  Split split = Split::kTrain;

  std::size_t size() const { return targets.size(); }
  bool empty() const { return targets.empty(); }
  // 0 for an empty dataset.
  std::size_t dimension() const { return inputs.empty() ? 0 : inputs.front().size(); }
  // Throws DimensionMismatch, and std::invalid_argument for y outside [0, 1].
  void add(std::vector<double> x, double y);
  void add(const MetaGraph& meta, double y);
};

std::vector<double> encode_features(const MetaGraph& meta);

// Per-layer gradients, same shapes as the model's parameters.
struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

// Fully connected network. weights[l] is (out x in); hidden layers use
// `hidden_activation`, the last layer `head`.
class PredictorModel {
 public:
  PredictorModel() = default;
  // widths = {input, hidden..., 1}. Weights are He-uniform with fan-in
  // scaling, biases zero.
  PredictorModel(const std::vector<int>& widths, std::uint64_t seed,
                 Activation hidden_activation = Activation::kRelu,
                 OutputHead head = OutputHead::kSigmoid);

  int input_dimension() const;
  std::vector<int> widths() const;
  std::size_t num_parameters() const;

  // Throws DimensionMismatch.
  double forward(std::span<const double> x) const;
  // One row per sample.
  Eigen::VectorXd forward_batch(const Eigen::MatrixXd& x) const;

  // Mean squared error over the batch; fills `grads` when non-null.
  double loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
              Gradients* grads = nullptr) const;

  bool all_finite() const;

  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Activation hidden_activation = Activation::kRelu;
  OutputHead head = OutputHead::kSigmoid;

  bool operator==(const PredictorModel& other) const;
};

struct TrainConfig {
  int epochs = 300;
  int batch_size = 128;
  double learning_rate = 0.1;
  double weight_decay = 1e-4;
  double momentum = 0.9;
  // "cosine" (per-epoch cosine decay to 0) or "constant".
  std::string schedule = "cosine";
  std::uint64_t seed = 0;
  std::vector<int> hidden = {256, 256};

  // Throws std::invalid_argument.
  void check() const;
};

// Learning rate used during `epoch` (0-based).
double scheduled_learning_rate(const TrainConfig& cfg, int epoch);

struct TrainReport {
  std::vector<double> epoch_loss;  // mean batch loss per epoch
};

// SGD with momentum on MSE, weight decay on every parameter, reshuffled
// every epoch from the seed. Throws EmptyDataset, DimensionMismatch, and
// std::runtime_error if a parameter goes non-finite.
PredictorModel train(const Dataset& data, const TrainConfig& cfg,
                     TrainReport* report = nullptr);
// Continues from `init` (its widths override cfg.hidden).
PredictorModel train_from(PredictorModel init, const Dataset& data,
                          const TrainConfig& cfg, TrainReport* report = nullptr);

// Throws DimensionMismatch.
double predict(const PredictorModel& model, const MetaGraph& meta);
std::vector<double> predict_all(const PredictorModel& model, const Dataset& data);

struct RankingMetrics {
  double pearson = 0.0;
  double kendall = 0.0;  // tau-b
  double mse = 0.0;
};

// Throws DegenerateVariance (carrying the MSE) when either side is constant,
// std::invalid_argument when fewer than 2 pairs or the sizes differ.
RankingMetrics ranking_metrics(std::span<const double> predicted,
                               std::span<const double> truth);
RankingMetrics ranking_metrics(const PredictorModel& model, const Dataset& test);

double pearson_correlation(std::span<const double> a, std::span<const double> b);
double kendall_tau_b(std::span<const double> a, std::span<const double> b);

// Largest |analytic - numeric| / max(|analytic|, |numeric|, floor) over every
// parameter, numeric gradients from central differences with step
// cbrt(machine epsilon) * max(1, |w|). Both sides are on the single-sample squared error.
double gradient_check(const PredictorModel& model, std::span<const double> x,
                      double y, double floor = 1e-7);

// Binary checkpoint: magic, version, activation/head, layer shapes and
// row-major float64 weights and biases. Round trips bit-exactly.
void save_checkpoint(const std::string& path, const PredictorModel& model);
PredictorModel load_checkpoint(const std::string& path);

}  // namespace dcs

#endif  // DCS_PREDICTOR_H_
