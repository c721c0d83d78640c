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

// Edge-popup search over frozen random weights: every weight carries a score,
// the forward pass keeps the top k% scores of each layer, and only the scores
// are trained.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "snnlth/core.hpp"
#include "snnlth/encode.hpp"
#include "snnlth/train.hpp"

namespace snnlth {

// Number of kept entries: ceil(keep_percent / 100 * count).
std::size_t kept_count(std::size_t count, double keep_percent);

// Mask with kept_count(...) ones at the largest scores. Ties go to the
// smaller flat index. keep_percent is the fraction KEPT, in (0, 100).
BinaryMatrix select_topk_mask(const Matrix& scores, double keep_percent);

// s + alpha * dL/dI_v * S_u * w.
double score_update(double score, double alpha, double dl_di, double s_u, double w);

// Scores ~ U[-1, 1] per layer.
std::vector<Matrix> init_scores(const SpikingNetwork& net, std::uint64_t seed);

struct SearchConfig {
  double keep_percent = 50.0;
  TrainConfig train;
};

struct SearchEpoch {
  std::size_t epoch = 0;
  double train_acc = 0.0;
  double eval_acc = 0.0;
  double sparsity = 0.0;  // 1 - kept fraction
};

struct SearchResult {
  std::vector<BinaryMatrix> masks;
  std::vector<Matrix> scores;
  std::vector<SearchEpoch> trace;
};

// Applies the current top-k masks to `net`.
void apply_topk_masks(SpikingNetwork& net, const std::vector<Matrix>& scores,
                      double keep_percent);

// Trains `scores` in place; `net.weights` never change. On return the
// network carries the final masks. `eval` may be empty.
SearchResult edge_popup_train(SpikingNetwork& net, std::vector<Matrix>& scores,
                              const LabeledSpikeDataset& train_data,
                              const LabeledSpikeDataset& eval_data,
                              const SearchConfig& cfg, const SurrogateSpec& spec);

}  // namespace snnlth
