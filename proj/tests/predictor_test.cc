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

#include <cmath>
#include <cstdio>
#include <fstream>

#include "dcs/errors.h"
#include "dcs/predictor.h"
#include "dcs/random.h"
#include "dcs/search.h"

using namespace dcs;

namespace {

std::vector<double> random_bits(Rng& rng, int dim) {
  std::vector<double> x(dim);
  for (double& v : x) v = bernoulli(rng, 0.5) ? 1.0 : 0.0;
  return x;
}

Dataset linear_dataset(int n, int dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> w(dim);
  for (double& v : w) v = uniform01(rng);
  double total = 0.0;
  for (double v : w) total += v;
  Dataset data;
  for (int i = 0; i < n; ++i) {
    const std::vector<double> x = random_bits(rng, dim);
    double dot = 0.0;
    for (int j = 0; j < dim; ++j) dot += w[j] * x[j];
    data.add(x, 0.2 + 0.6 * dot / total);
  }
  return data;
}

// Tau-b from its definition, counting every pair.
double reference_tau_b(const std::vector<double>& a, const std::vector<double>& b) {
  double concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      if (da == 0 && db == 0) continue;
      if (da == 0) {
        ties_a += 1;
      } else if (db == 0) {
        ties_b += 1;
      } else if ((da > 0) == (db > 0)) {
        concordant += 1;
      } else {
        discordant += 1;
      }
    }
  }
  return (concordant - discordant) /
         std::sqrt((concordant + discordant + ties_a) * (concordant + discordant + ties_b));
}

std::string temp_path(const char* name) {
  return std::string("/tmp/dcs_predictor_test_") + name;
}

}  // namespace

TEST_CASE("model construction") {
  const PredictorModel m({612, 256, 256, 1}, 3);
  CHECK(m.input_dimension() == 612);
  CHECK(m.widths() == std::vector<int>{612, 256, 256, 1});
  CHECK(m.num_parameters() == 612 * 256 + 256 + 256 * 256 + 256 + 256 + 1);
  for (const auto& b : m.biases) CHECK(b.isZero());
  const double bound = std::sqrt(6.0 / 612);
  CHECK(m.weights[0].cwiseAbs().maxCoeff() <= bound);
  CHECK(PredictorModel({612, 256, 256, 1}, 3) == m);
  CHECK_FALSE(PredictorModel({612, 256, 256, 1}, 4) == m);
  CHECK_THROWS_AS(PredictorModel({4, 2}, 1), std::invalid_argument);
}

TEST_CASE("forward pass") {
  Rng rng(1);
  const PredictorModel m({20, 16, 16, 1}, 8);
  const std::vector<double> x = random_bits(rng, 20);
  const double y = m.forward(x);
  CHECK(std::isfinite(y));
  CHECK(y >= 0.0);
  CHECK(y <= 1.0);
  CHECK(m.forward(x) == y);
  CHECK_THROWS_AS(m.forward(std::vector<double>(19)), DimensionMismatch);

  Eigen::MatrixXd batch(30, 20);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 30; ++i) {
    rows.push_back(random_bits(rng, 20));
    for (int j = 0; j < 20; ++j) batch(i, j) = rows.back()[j];
  }
  const Eigen::VectorXd out = m.forward_batch(batch);
  for (int i = 0; i < 30; ++i) {
    CHECK(out(i) == doctest::Approx(m.forward(rows[i])).epsilon(1e-6));
  }
}

TEST_CASE("dataset") {
  Dataset d;
  CHECK(d.empty());
  CHECK(d.dimension() == 0);
  d.add({1.0, 0.0}, 0.5);
  CHECK_THROWS_AS(d.add({1.0}, 0.5), DimensionMismatch);
  CHECK_THROWS_AS(d.add({1.0, 1.0}, 1.5), std::invalid_argument);
  Dataset e;
  e.add(single_cell_space(3), 0.25);
  CHECK(e.size() == 1);
  CHECK(e.dimension() == 3);
}

TEST_CASE("training") {
  SUBCASE("linear target is fitted") {
    const Dataset data = linear_dataset(200, 12, 5);
    TrainConfig cfg;
    cfg.hidden = {64, 64};
    cfg.batch_size = 32;
    cfg.seed = 1;
    const PredictorModel m = train(data, cfg);
    const std::vector<double> pred = predict_all(m, data);
    double mse = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      mse += (pred[i] - data.targets[i]) * (pred[i] - data.targets[i]);
    }
    CHECK(mse / static_cast<double>(pred.size()) < 1e-3);
  }
  SUBCASE("constant target") {
    Rng rng(2);
    Dataset train_set, test_set;
    for (int i = 0; i < 64; ++i) train_set.add(random_bits(rng, 10), 0.7);
    for (int i = 0; i < 16; ++i) test_set.add(random_bits(rng, 10), 0.7);
    auto test_mse = [&](const PredictorModel& m) {
      // The truth has no variance, so only the MSE is defined.
      try {
        ranking_metrics(m, test_set);
      } catch (const DegenerateVariance& e) {
        return e.mse();
      }
      FAIL("expected DegenerateVariance");
      return 1.0;
    };
    TrainConfig cfg;
    cfg.weight_decay = 0.0;
    cfg.batch_size = 16;
    cfg.epochs = 1000;
    cfg.hidden = {};
    CHECK(test_mse(train(train_set, cfg)) < 1e-6);

    // With hidden ReLU layers the input dependence decays slowly; the fit
    // still tightens by orders of magnitude.
    cfg.epochs = 300;
    cfg.hidden = {16, 16};
    TrainReport report;
    const PredictorModel m = train(train_set, cfg, &report);
    CHECK(report.epoch_loss.back() < report.epoch_loss.front() / 100);
    CHECK(test_mse(m) < 1e-3);
  }
  SUBCASE("empty dataset") {
    CHECK_THROWS_AS(train(Dataset{}, TrainConfig{}), EmptyDataset);
  }
  SUBCASE("bad configuration") {
    TrainConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
    cfg = TrainConfig{};
    cfg.schedule = "step";
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
  }
  SUBCASE("identical seeds give identical models") {
    const Dataset data = linear_dataset(100, 8, 6);
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.hidden = {32, 32};
    cfg.seed = 9;
    CHECK(train(data, cfg) == train(data, cfg));
    TrainConfig other = cfg;
    other.seed = 10;
    CHECK_FALSE(train(data, cfg) == train(data, other));
  }
  SUBCASE("convex reduction has non-increasing loss") {
    const Dataset data = linear_dataset(100, 8, 7);
    TrainConfig cfg;
    cfg.hidden = {};
    cfg.epochs = 50;
    cfg.batch_size = 100;
    cfg.momentum = 0.0;
    cfg.weight_decay = 0.0;
    cfg.schedule = "constant";
    cfg.learning_rate = 0.05;
    const PredictorModel init({8, 1}, 1, Activation::kIdentity, OutputHead::kIdentity);
    TrainReport report;
    train_from(init, data, cfg, &report);
    REQUIRE(report.epoch_loss.size() == 50);
    for (std::size_t e = 1; e < report.epoch_loss.size(); ++e) {
      CHECK(report.epoch_loss[e] <= report.epoch_loss[e - 1]);
    }
  }
}

TEST_CASE("learning rate schedule") {
  TrainConfig cfg;
  cfg.epochs = 300;
  CHECK(scheduled_learning_rate(cfg, 0) == 0.1);
  CHECK(scheduled_learning_rate(cfg, 150) == doctest::Approx(0.05));
  cfg.schedule = "constant";
  CHECK(scheduled_learning_rate(cfg, 150) == 0.1);
}

TEST_CASE("ranking metrics") {
  const std::vector<double> truth{0.1, 0.4, 0.2, 0.9, 0.5};
  const RankingMetrics perfect = ranking_metrics(truth, truth);
  CHECK(perfect.pearson == doctest::Approx(1.0));
  CHECK(perfect.kendall == doctest::Approx(1.0));
  CHECK(perfect.mse == 0.0);

  const std::vector<double> reversed{0.9, 0.6, 0.8, 0.1, 0.5};
  CHECK(ranking_metrics(reversed, truth).kendall == doctest::Approx(-1.0));

  const std::vector<double> pred{1, 2, 3, 4};
  const std::vector<double> hand{1, 3, 2, 4};
  CHECK(kendall_tau_b(pred, hand) == doctest::Approx(2.0 / 3.0));

  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(25), b(25);
    for (double& v : a) v = static_cast<double>(uniform_index(rng, 6));
    for (double& v : b) v = static_cast<double>(uniform_index(rng, 6));
    CHECK(kendall_tau_b(a, b) == doctest::Approx(reference_tau_b(a, b)).epsilon(1e-12));
  }

  const std::vector<double> flat{0.5, 0.5, 0.5, 0.5, 0.5};
  try {
    ranking_metrics(flat, truth);
    FAIL("expected DegenerateVariance");
  } catch (const DegenerateVariance& e) {
    CHECK(e.mse() > 0.0);
  }
  CHECK_THROWS_AS(ranking_metrics(std::vector<double>{0.1}, std::vector<double>{0.2}),
                  std::invalid_argument);
}

TEST_CASE("gradient check") {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const PredictorModel m({15, 12, 10, 1}, 100 + trial);
    CHECK(gradient_check(m, random_bits(rng, 15), uniform01(rng)) < 1e-4);
  }
  SUBCASE("dead units") {
    PredictorModel m({6, 4, 1}, 1);
    m.weights[0].setZero();
    m.biases[0].setConstant(-1.0);
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(1, 6);
    Eigen::VectorXd y(1);
    y(0) = 0.3;
    Gradients g;
    m.loss(x, y, &g);
    CHECK(g.weights[0].isZero());
    CHECK(gradient_check(m, std::vector<double>(6, 1.0), 0.3) < 1e-4);
  }
  SUBCASE("linear model") {
    const PredictorModel m({6, 1}, 2, Activation::kIdentity, OutputHead::kIdentity);
    CHECK(gradient_check(m, random_bits(rng, 6), 0.4) < 1e-8);
  }
}

TEST_CASE("checkpoint round trip") {
  const Dataset data = linear_dataset(50, 10, 8);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.hidden = {8, 8};
  const PredictorModel m = train(data, cfg);
  const std::string path = temp_path("model.bin");
  save_checkpoint(path, m);
  const PredictorModel back = load_checkpoint(path);
  CHECK(back == m);
  CHECK(predict_all(back, data) == predict_all(m, data));

  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "DCSMLP";
  }
  CHECK_THROWS_AS(load_checkpoint(path), SchemaError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_checkpoint(path), IoError);
}
