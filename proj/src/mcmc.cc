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

#include "dcs/mcmc.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "dcs/enumerate.h"
#include "dcs/random.h"

namespace dcs {

int StateSpace::index_of(std::uint64_t mask) const {
  auto it = index_.find(mask);
  return it == index_.end() ? -1 : it->second;
}

StateSpace StateSpace::make(int num_slots, std::vector<std::uint64_t> masks,
                            std::vector<double> perf) {
  if (masks.size() != perf.size()) throw std::invalid_argument("masks/perf size mismatch");
  if (num_slots < 0 || num_slots > 63) throw std::invalid_argument("slot count out of range");
  StateSpace space;
  space.num_slots = num_slots;
  space.masks = std::move(masks);
  space.perf = std::move(perf);
  for (std::size_t i = 0; i < space.masks.size(); ++i) {
    if (!std::isfinite(space.perf[i])) throw std::invalid_argument("non-finite perf");
    if (!space.index_.emplace(space.masks[i], static_cast<int>(i)).second) {
      throw std::invalid_argument("duplicate state");
    }
  }
  return space;
}

StateSpace enumerate_state_space(const MetaGraph& shape,
                                 const std::function<double(const MetaGraph&)>& perf) {
  Enumeration all = enumerate_space(shape);
  std::vector<double> values;
  values.reserve(all.valid.size());
  for (const MetaGraph& meta : all.valid) values.push_back(perf(meta));
  return StateSpace::make(static_cast<int>(shape.cells.front().num_slots()),
                          std::move(all.masks), std::move(values));
}

std::vector<double> stationary_distribution(std::span<const double> perf, double t) {
  if (!(t > 0.0)) throw NonPositiveTemperature("T = " + std::to_string(t));
  std::vector<double> pi(perf.size());
  if (perf.empty()) return pi;
  const double top = *std::max_element(perf.begin(), perf.end());
  double z = 0.0;
  for (std::size_t i = 0; i < perf.size(); ++i) {
    pi[i] = std::exp((perf[i] - top) / t);
    z += pi[i];
  }
  for (double& p : pi) p /= z;
  return pi;
}

bool is_connected(const StateSpace& space) {
  if (space.size() <= 1) return true;
  std::vector<bool> seen(space.size(), false);
  std::deque<int> queue{0};
  seen[0] = true;
  std::size_t visited = 1;
  while (!queue.empty()) {
    const int i = queue.front();
    queue.pop_front();
    for (int s = 0; s < space.num_slots; ++s) {
      const int j = space.index_of(space.masks[i] ^ (std::uint64_t{1} << s));
      if (j >= 0 && !seen[j]) {
        seen[j] = true;
        ++visited;
        queue.push_back(j);
      }
    }
  }
  return visited == space.size();
}

namespace {

void require_connected(const StateSpace& space) {
  if (space.size() == 0) throw DisconnectedSpace("empty state space");
  if (!is_connected(space)) {
    throw DisconnectedSpace("single-edge-flip proposal graph is not connected");
  }
}

}  // namespace

std::vector<double> run_metropolis_chain(const StateSpace& space, const ChainSpec& spec) {
  if (!(spec.temperature > 0.0)) {
    throw NonPositiveTemperature("T = " + std::to_string(spec.temperature));
  }
  require_connected(space);
  std::vector<double> freq(space.size(), 0.0);
  if (space.num_slots == 0) {
    freq[0] = 1.0;
    return freq;
  }
  Rng rng(spec.seed);
  int state = static_cast<int>(uniform_index(rng, space.size()));
  std::vector<std::uint64_t> visits(space.size(), 0);
  const auto slots = static_cast<std::size_t>(space.num_slots);
  for (std::uint64_t step = 0; step < spec.burn_in + spec.steps; ++step) {
    const auto s = uniform_index(rng, slots);
    const int next = space.index_of(space.masks[state] ^ (std::uint64_t{1} << s));
    if (next >= 0) {
      const double delta = space.perf[next] - space.perf[state];
      if (delta >= 0.0 || uniform01(rng) < std::exp(delta / spec.temperature)) {
        state = next;
      }
    }
    if (step >= spec.burn_in) ++visits[state];
  }
  for (std::size_t i = 0; i < freq.size(); ++i) {
    freq[i] = static_cast<double>(visits[i]) / static_cast<double>(spec.steps);
  }
  return freq;
}

Eigen::MatrixXd transition_matrix(const StateSpace& space, double t) {
  if (!(t > 0.0)) throw NonPositiveTemperature("T = " + std::to_string(t));
  const auto n = static_cast<Eigen::Index>(space.size());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  const double q = space.num_slots > 0 ? 1.0 / space.num_slots : 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double out = 0.0;
    for (int s = 0; s < space.num_slots; ++s) {
      const int j = space.index_of(space.masks[i] ^ (std::uint64_t{1} << s));
      if (j < 0) continue;
      const double a = std::min(1.0, std::exp((space.perf[j] - space.perf[i]) / t));
      p(i, j) = q * a;
      out += q * a;
    }
    p(i, i) = 1.0 - out;
  }
  return p;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return 0.5 * sum;
}

ChainDiagnostics chain_diagnostics(const StateSpace& space, const ChainSpec& spec) {
  constexpr std::size_t kMaxStates = 4096;
  if (space.size() > kMaxStates) {
    throw std::invalid_argument("exact diagnostics limited to 4096 states");
  }
  require_connected(space);
  ChainDiagnostics diag;
  diag.pi = stationary_distribution(space.perf, spec.temperature);
  diag.frequencies = run_metropolis_chain(space, spec);
  diag.total_variation = total_variation(diag.frequencies, diag.pi);

  const Eigen::MatrixXd p = transition_matrix(space, spec.temperature);
  const auto n = p.rows();
  const Eigen::Map<const Eigen::RowVectorXd> pi(diag.pi.data(), n);
  diag.stationarity_residual = (pi * p - pi).cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i) {
    diag.min_self_transition = std::min(diag.min_self_transition, p(i, i));
    for (Eigen::Index j = i + 1; j < n; ++j) {
      diag.balance_residual = std::max(diag.balance_residual,
                                       std::abs(pi(i) * p(i, j) - pi(j) * p(j, i)));
    }
  }
  if (n > 1) {
    // Reversible chain: D^1/2 P D^-1/2 is symmetric with P's spectrum.
    const Eigen::VectorXd root = pi.transpose().cwiseSqrt();
    const Eigen::MatrixXd sym =
        root.asDiagonal() * p * root.cwiseInverse().asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        0.5 * (sym + sym.transpose()), Eigen::EigenvaluesOnly);
    Eigen::VectorXd mags = solver.eigenvalues().cwiseAbs();
    std::sort(mags.data(), mags.data() + mags.size(), std::greater<>());
    // The largest is the unit eigenvalue of pi.
    diag.spectral_gap = 1.0 - mags(1);
  }
  return diag;
}

std::string diagnostics_csv(const StateSpace& space, const ChainDiagnostics& diag) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string csv = "state_hex,perf,pi_analytic,freq_empirical\n";
  char line[256];
  const std::size_t nbytes = (static_cast<std::size_t>(space.num_slots) + 7) / 8;
  for (std::size_t i = 0; i < space.size(); ++i) {
    std::string hex;
    for (std::size_t b = 0; b < nbytes; ++b) {
      unsigned byte = 0;
      for (int k = 0; k < 8; ++k) {
        const std::size_t slot = b * 8 + static_cast<std::size_t>(k);
        if (slot < static_cast<std::size_t>(space.num_slots) && (space.masks[i] >> slot & 1)) {
          byte |= 0x80u >> k;
        }
      }
      hex.push_back(kHex[byte >> 4]);
      hex.push_back(kHex[byte & 0xf]);
    }
    std::snprintf(line, sizeof line, ",%.17g,%.17g,%.17g\n", space.perf[i], diag.pi[i],
                  diag.frequencies[i]);
    csv += hex;
    csv += line;
  }
  std::snprintf(line, sizeof line,
                "# summary,tv=%.17g,spectral_gap=%.17g,stationarity_residual=%.3g,"
                "balance_residual=%.3g\n",
                diag.total_variation, diag.spectral_gap, diag.stationarity_residual,
                diag.balance_residual);
  csv += line;
  return csv;
}

}  // namespace dcs
