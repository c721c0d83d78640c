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

// Rewind iterative pruning with magnitude or spike-flip-probability scores.
//
//   train R epochs, save theta_rewind, train on to N epochs
//   repeat K times:
//     score, remove p% of the remaining weights (lowest scores first)
//     reload theta_rewind (.) m_k, retrain N epochs
//
// sf1 ranks hidden weights by the flip probability P and keeps magnitude for
// the encoding (first) and readout (last) layers. sf2 additionally applies the
// mask of those two layers only in the forward pass: their updates and the
// rewind ignore it and their masks are recomputed from scratch each round.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "snnlth/core.hpp"
#include "snnlth/encode.hpp"
#include "snnlth/prob_model.hpp"
#include "snnlth/train.hpp"

namespace snnlth {

enum class Criterion { kMagnitude, kSf1, kSf2 };
enum class PruneScope { kGlobal, kPerLayer };
enum class LayerRole { kEncoding, kHidden, kReadout };
enum class MaskPhase { kLoss, kUpdate, kRewind };

std::string to_string(Criterion c);
Criterion parse_criterion(const std::string& s);

LayerRole layer_role(std::size_t layer, std::size_t depth);

// Whether the mask of a layer applies in a training phase.
bool sf_imp2_mask_policy(LayerRole role, MaskPhase phase, Criterion criterion);

// |w| for kept weights; pruned entries are NaN (never ranked).
Matrix magnitude_scores(const MaskedDenseLayer& layer);

// Flip probability per kept weight from input firing rates and the output
// neuron statistics. Layers without normalization get magnitude scores.
Matrix sf_scores(const MaskedDenseLayer& layer, const MembraneStats& stats, double u_th);

struct ImpConfig {
  double rate = 20.0;            // percent of remaining weights removed per round
  std::size_t iterations = 10;   // K
  std::size_t rewind_epoch = 2;  // R
  std::size_t epochs = 50;       // N
  Criterion criterion = Criterion::kMagnitude;
  PruneScope scope = PruneScope::kGlobal;
  void validate() const;
};

struct ImpIteration {
  std::size_t iteration = 0;
  std::vector<BinaryMatrix> masks;
  std::size_t remaining = 0;
  double sparsity = 0.0;
  double eval_acc = 0.0;
  std::uint64_t scores_digest = 0;
};

struct PruneTrajectory {
  Criterion criterion = Criterion::kMagnitude;
  std::vector<ImpIteration> iterations;  // entry 0 is the dense network
  std::vector<Matrix> rewind_weights;
};

// Number of weights kept after round k out of n: round(n (1 - p/100)^k).
std::size_t scheduled_count(std::size_t n, double rate, std::size_t round);

// Called after each reload, before retraining.
using RewindObserver = std::function<void(std::size_t iteration, const SpikingNetwork& reloaded)>;

PruneTrajectory imp_run(SpikingNetwork& net, const LabeledSpikeDataset& train_data,
                        const LabeledSpikeDataset& eval_data, const ImpConfig& cfg,
                        const TrainConfig& train_cfg, const SurrogateSpec& spec,
                        const RewindObserver& observer = {});

}  // namespace snnlth
