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

// Surrogate-gradient backpropagation through time.
//
// The Heaviside spike is differentiated with a rectangular window of width a
// centred on u_th. The (1 - s) factor in the reset path is detached, so
// dh^t/du^t = beta * (1 - s^t).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "snnlth/core.hpp"
#include "snnlth/encode.hpp"

namespace snnlth {

struct SurrogateSpec {
  double width = 1.0;  // a > 0
  void validate() const;
};

// 1/a inside |u - u_th| < a/2, else 0.
double surrogate_grad(double u, const LifParams& params, const SurrogateSpec& spec);

struct TrainConfig {
  double learning_rate = 0.5;
  std::size_t epochs = 50;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  double momentum = 0.0;  // 0 = plain SGD
  void validate() const;
};

// Softmax cross-entropy over per-class firing rates (spike count / T).
double rate_loss(const SpikeTrain& output, std::size_t label);
double rate_loss(std::span<const double> rates, std::size_t label);

// Class with the most output spikes; ties go to the lowest index.
std::size_t predict(const SpikeTrain& output);
double accuracy(SpikingNetwork& net, const LabeledSpikeDataset& data);

struct Gradients {
  double loss = 0.0;             // mean over the batch
  std::size_t correct = 0;       // predictions matching the label
  std::vector<Matrix> weights;   // dL/d(effective weight), batch mean, unmasked
};

// Batch-mean gradient of rate_loss w.r.t. every effective weight. Masked
// entries still receive dL/dW_eff (a straight-through value); callers decide
// whether the mask gates the update. Samples are reduced in index order.
Gradients compute_gradients(const SpikingNetwork& net,
                            std::span<const LabeledSample> batch,
                            const SurrogateSpec& spec,
                            Activation act = Activation::kHeaviside);

// Loss of the batch under the given activation; used by gradient checks.
double batch_loss(const SpikingNetwork& net, std::span<const LabeledSample> batch,
                  const SurrogateSpec& spec, Activation act);

// One plain-SGD step: w -= lr * grad on unmasked weights. Returns the batch loss.
double bptt_step(SpikingNetwork& net, std::span<const LabeledSample> batch,
                 const TrainConfig& cfg, const SurrogateSpec& spec);

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0.0;
  double train_acc = 0.0;
};

// SGD with optional momentum over shuffled mini-batches. The shuffle for
// epoch e depends only on (seed, e), so training E epochs in one call or in
// several consecutive calls gives bit-identical weights.
class Trainer {
 public:
  Trainer(TrainConfig cfg, SurrogateSpec spec);

  // Per-layer switch: when false, the update also touches masked weights
  // (the mask only applies in the forward pass).
  void set_update_masked(std::vector<bool> flags) { update_masked_ = std::move(flags); }

  EpochStats train_epoch(SpikingNetwork& net, const LabeledSpikeDataset& data,
                         std::size_t epoch);
  std::vector<EpochStats> train(SpikingNetwork& net, const LabeledSpikeDataset& data,
                                std::size_t first_epoch, std::size_t n_epochs);

  const TrainConfig& config() const { return cfg_; }

 private:
  TrainConfig cfg_;
  SurrogateSpec spec_;
  std::vector<bool> update_masked_;
  std::vector<Matrix> velocity_;
};

// Deterministic order of sample indices for one epoch.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch);

struct NetworkShape {
  std::vector<std::size_t> widths;  // input width first, output width last
  LifParams params;
  double init_scale = 1.0;  // weights ~ U[-b, b], b = init_scale * sqrt(3 / fan_in)
  bool hidden_norm = false; // unit normalization on hidden layers
  bool all_norm = false;    // unit normalization on every layer
};

SpikingNetwork make_network(const NetworkShape& shape, std::uint64_t seed);

// Sets mu_b / sigma_b of every normalized layer to the mean / population
// standard deviation of its raw (pre-normalization) input over `data`.
void calibrate_norm(SpikingNetwork& net, const LabeledSpikeDataset& data);

}  // namespace snnlth
