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

// Exact checks of the Metropolis chain over a small, fully enumerated design
// space: the Boltzmann stationary distribution pi_i ~ exp(perf_i / T), a
// simulated chain with a symmetric single-edge-flip proposal, and the exact
// transition matrix with its spectral gap.
//
// Proposal: pick one of the M edge slots uniformly and flip it. Flips that
// leave the valid state set are rejected self-loops, so q(j|i) = q(i|j) = 1/M
// for every pair of neighbouring valid states.

#ifndef DCS_MCMC_H_
#define DCS_MCMC_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "dcs/metagraph.h"

namespace dcs {

struct StateSpace {
  int num_slots = 0;
  // Slot bitmask of every state (row-major slot order, as in encode()).
  std::vector<std::uint64_t> masks;
  std::vector<double> perf;

  std::size_t size() const { return masks.size(); }
  // -1 when `mask` is not a state.
  int index_of(std::uint64_t mask) const;

  // Throws std::invalid_argument on duplicates, size mismatch or non-finite
  // performance.
  static StateSpace make(int num_slots, std::vector<std::uint64_t> masks,
                         std::vector<double> perf);

 private:
  std::unordered_map<std::uint64_t, int> index_;
};

// All valid graphs of a single-cell template, scored by `perf`.
StateSpace enumerate_state_space(const MetaGraph& shape,
                                 const std::function<double(const MetaGraph&)>& perf);

struct ChainSpec {
  double temperature = 1.0;
  std::uint64_t steps = 1'000'000;
  std::uint64_t burn_in = 10'000;
  std::uint64_t seed = 0;
};

// Throws NonPositiveTemperature. Uses a max shift, so huge perf / T is fine.
std::vector<double> stationary_distribution(std::span<const double> perf, double t);

// True when every state reaches every other by single valid flips.
bool is_connected(const StateSpace& space);

// Post-burn-in visit frequencies. Throws DisconnectedSpace,
// NonPositiveTemperature.
std::vector<double> run_metropolis_chain(const StateSpace& space, const ChainSpec& spec);

// Exact P with P_ij = (1/M) min(1, exp((perf_j - perf_i) / T)) for valid
// neighbours and the remaining mass on the diagonal.
Eigen::MatrixXd transition_matrix(const StateSpace& space, double t);

double total_variation(std::span<const double> p, std::span<const double> q);

struct ChainDiagnostics {
  std::vector<double> pi;
  std::vector<double> frequencies;
  double total_variation = 0.0;
  double spectral_gap = 1.0;         // 1 - |lambda_2|
  double stationarity_residual = 0;  // || pi P - pi ||_inf
  double balance_residual = 0;       // max |pi_i P_ij - pi_j P_ji|
  double min_self_transition = 1.0;  // aperiodicity witness
};

// Throws DisconnectedSpace; std::invalid_argument beyond 4096 states.
ChainDiagnostics chain_diagnostics(const StateSpace& space, const ChainSpec& spec);

// state_hex,perf,pi_analytic,freq_empirical rows, then a "# summary" line.
std::string diagnostics_csv(const StateSpace& space, const ChainDiagnostics& diag);

}  // namespace dcs

#endif  // DCS_MCMC_H_
