// Copyright 2026 The snnlth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Lottery-ticket width bounds and the virtual-neuron construction.
//
// A target weight w_hat between a presynaptic spike s and a neuron is
// reproduced by one virtual spiking neuron with in-weight v >= u_th and
// out-weight w_tilde close to w_hat: the virtual neuron fires exactly when
// s = 1, so the path contributes w_tilde * s. Among k candidates drawn from
// U[-1, 1]^2 the chance that none qualifies is (1 - C_th eps)^k with
// C_th = (1 - u_th) / 2, which gives every width bound below (natural log).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "snnlth/core.hpp"
#include "snnlth/encode.hpp"

namespace snnlth {

struct LthBoundParams {
  std::size_t width = 4;      // N
  std::size_t depth = 1;      // L
  std::size_t timesteps = 1;  // T
  double eps = 0.1;
  double delta = 0.1;
  double u_th = 0.5;
  double C = 1.0;  // 2 p_sup / (1 - beta)

  double c_th() const { return (1.0 - u_th) / 2.0; }
  void validate() const;
};

// C = 2 p_sup / (1 - beta).
double dataset_constant(double p_sup, double beta);

// ceil(log(1/delta) / (C_th eps)).
std::uint64_t required_k_single(const LthBoundParams& p);
// N * ceil(N / (C_th eps) * log(N / delta)).
std::uint64_t required_k_layer(const LthBoundParams& p);
// N * ceil(N / (C_th eps) * log(N^2 / delta)). The union runs over N^2 blocks.
std::uint64_t required_k_layer_to_layer(const LthBoundParams& p);
// Same with log(N / delta); the weaker form quoted for the layer-to-layer
// statement, reported alongside for comparison.
std::uint64_t required_k_layer_to_layer_short_log(const LthBoundParams& p);
// N^2 * ceil(N / (C_th eps) * log(N^2 / (delta - N C eps))).
std::uint64_t required_k_activation(const LthBoundParams& p);
// N^2 * ceil(N / (C_th eps) * log(N^2 L / (delta - N C L T eps))).
std::uint64_t required_k_network(const LthBoundParams& p);

// Largest eps keeping delta - N C L T eps positive, times `fraction`.
double feasible_eps(const LthBoundParams& p, double fraction);

enum class SelectionRule { kFirstQualifying, kBestError };

struct EquivalentBlock {
  std::vector<double> v_in;
  std::vector<double> w_out;
  std::vector<std::uint8_t> mask;  // at most one entry set
  std::optional<std::size_t> active;
  double error = 0.0;  // |w_out[active] - target| when active

  bool ok() const { return active.has_value(); }
};

// Chooses the virtual neuron for `target` among the given candidates: the
// candidate must satisfy v >= u_th and |w - target| <= eps.
EquivalentBlock select_virtual_neuron(std::vector<double> v_in, std::vector<double> w_out,
                                      double target, double eps, double u_th,
                                      SelectionRule rule = SelectionRule::kFirstQualifying);

// Draws k candidate pairs (v, w) ~ U[-1, 1]^2 from `seed`, then selects.
EquivalentBlock construct_single_weight(double target, std::size_t k, double eps,
                                        double u_th, std::uint64_t seed,
                                        SelectionRule rule = SelectionRule::kFirstQualifying);

struct ConstructionOptions {
  SelectionRule rule = SelectionRule::kFirstQualifying;
  // Keep only the virtual neurons that can carry signal (one slot per block).
  // The dropped neurons have zero out-mask, so the network function is the
  // same as the full-width construction drawn from the same seed.
  bool compact = false;
};

struct EquivalentNetwork {
  SpikingNetwork net;                // 2L layers: virtual, out, virtual, out, ...
  std::vector<Matrix> achieved;      // per target layer: realized out-weight per entry
  std::vector<Matrix> deviation;     // achieved - target (failed blocks realize 0)
  std::size_t blocks = 0;
  std::size_t failed_blocks = 0;
  std::size_t block_size = 0;        // candidates per block (k')

  bool all_ok() const { return failed_blocks == 0; }
  // Worst |(W_tilde (.) B) sigma(V s) - W_hat s|_i over outputs, layers and
  // every binary input s.
  double max_linear_error() const;
};

// Builds the masked equivalent of `target` from k_per_layer virtual neurons
// per target layer. Each target weight (i, j) owns a block of
// k' = floor(k_per_layer / (N_out N_in)) candidates; candidate a of block
// (i, j) takes input j only and feeds output i only, and must match the
// weight within eps / N_in so every output row stays within eps.
// Throws DomainError if a target weight lies outside [-1/sqrt(N_in), 1/sqrt(N_in)].
EquivalentNetwork construct_equivalent_network(const SpikingNetwork& target,
                                               std::size_t k_per_layer, double eps,
                                               std::uint64_t seed,
                                               const ConstructionOptions& opts = {});

// Copy of `target` with each layer's weights scaled into the admissible box.
// Scaling changes spike semantics relative to thresholds; `scaled` reports
// whether any layer changed.
struct RescaleResult {
  SpikingNetwork net;
  bool scaled = false;
};
RescaleResult rescale_to_admissible(const SpikingNetwork& target);

// Linear map of a construction for one target layer applied to input `s`:
// used to compare against W_hat s directly.
std::vector<double> equivalent_linear_map(const EquivalentNetwork& eq, std::size_t target_layer,
                                          std::span<const std::uint8_t> s);

struct Agreement {
  double fraction = 0.0;     // samples whose outputs match at every timestep
  double mean_l2 = 0.0;      // mean over samples of (1/T) sum_t ||A^t - B^t||_2
  std::size_t samples = 0;
  std::size_t matching = 0;
};

Agreement measure_agreement(SpikingNetwork& a, SpikingNetwork& b,
                            const LabeledSpikeDataset& data);

// Desk-scale end-to-end check: random targets with weights
// U[-1/sqrt(N), 1/sqrt(N)], random Bernoulli inputs, an equivalent network
// built at k = required_k_network, and exact output comparison.
struct LthExperimentConfig {
  LthBoundParams bounds;        // C is replaced by the measured value when measure_c
  LifParams lif;
  bool measure_c = true;
  bool auto_eps = true;         // eps = eps_fraction * largest feasible eps
  double eps_fraction = 0.5;
  std::size_t targets = 500;
  std::size_t pilot_targets = 200;
  double input_rate = 0.5;
  bool compact = true;
  SelectionRule rule = SelectionRule::kFirstQualifying;
  std::uint64_t seed = 0;
};

struct LthExperimentResult {
  LthBoundParams bounds;  // with the C and eps actually used
  double p_sup = 0.0;
  std::uint64_t k_single = 0;
  std::uint64_t k_layer = 0;
  std::uint64_t k_layer_to_layer = 0;
  std::uint64_t k_layer_to_layer_short_log = 0;
  std::uint64_t k_activation = 0;
  std::uint64_t k_network = 0;
  std::size_t blocks = 0;
  std::size_t failed_blocks = 0;
  std::size_t trials_with_failed_blocks = 0;
  Agreement agreement;
};

SpikingNetwork random_target_network(std::size_t width, std::size_t depth,
                                     const LifParams& lif, std::uint64_t seed);
SpikeTrain random_spike_input(std::size_t timesteps, std::size_t width, double rate,
                              std::uint64_t seed);

// p_sup of all membrane potentials of `count` random targets pooled together.
double pooled_p_sup(std::size_t width, std::size_t depth, std::size_t timesteps,
                    const LifParams& lif, double input_rate, std::size_t count,
                    std::uint64_t seed);

// Throws InfeasibleBoundError when delta <= N C L T eps.
LthExperimentResult run_lth_experiment(const LthExperimentConfig& cfg);

}  // namespace snnlth
