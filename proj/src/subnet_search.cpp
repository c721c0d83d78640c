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

#include "snnlth/subnet_search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "snnlth/errors.hpp"
#include "snnlth/rng.hpp"

namespace snnlth {

std::size_t kept_count(std::size_t count, double keep_percent) {
  if (!(keep_percent > 0.0 && keep_percent < 100.0)) {
    throw DomainError("keep_percent must lie in (0, 100)");
  }
  // Round the product first so that 50% of 4 is exactly 2 and not 2 + ulp.
  const double exact = keep_percent / 100.0 * static_cast<double>(count);
  const double rounded = std::round(exact);
  const double k = std::abs(exact - rounded) < 1e-9 ? rounded : std::ceil(exact);
  return std::min(count, static_cast<std::size_t>(k));
}

BinaryMatrix select_topk_mask(const Matrix& scores, double keep_percent) {
  const std::size_t n = scores.size();
  const std::size_t k = kept_count(n, keep_percent);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const auto flat = scores.flat();
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      return flat[a] > flat[b] || (flat[a] == flat[b] && a < b);
                    });
  BinaryMatrix mask(scores.rows(), scores.cols(), 0);
  for (std::size_t r = 0; r < k; ++r) mask.flat()[idx[r]] = 1;
  return mask;
}

double score_update(double score, double alpha, double dl_di, double s_u, double w) {
  return score + alpha * dl_di * s_u * w;
}

std::vector<Matrix> init_scores(const SpikingNetwork& net, std::uint64_t seed) {
  std::vector<Matrix> scores;
  for (std::size_t l = 0; l < net.depth(); ++l) {
    Rng rng(derive_seed(seed, {0x73636f7265ULL, l}));
    Matrix s(net.layers[l].out_dim(), net.layers[l].in_dim());
    for (double& v : s.flat()) v = uniform(rng, -1.0, 1.0);
    scores.push_back(std::move(s));
  }
  return scores;
}

void apply_topk_masks(SpikingNetwork& net, const std::vector<Matrix>& scores,
                      double keep_percent) {
  if (scores.size() != net.depth()) throw DomainError("apply_topk_masks: one score matrix per layer required");
  for (std::size_t l = 0; l < net.depth(); ++l) {
    if (!scores[l].same_shape(net.layers[l].weights)) {
      throw DomainError("apply_topk_masks: score shape differs from weights");
    }
    net.layers[l].mask = select_topk_mask(scores[l], keep_percent);
  }
}

SearchResult edge_popup_train(SpikingNetwork& net, std::vector<Matrix>& scores,
                              const LabeledSpikeDataset& train_data,
                              const LabeledSpikeDataset& eval_data,
                              const SearchConfig& cfg, const SurrogateSpec& spec) {
  if (train_data.empty()) throw DomainError("edge_popup_train: empty training data");
  cfg.train.validate();
  spec.validate();
  apply_topk_masks(net, scores, cfg.keep_percent);

  SearchResult res;
  const double kept = static_cast<double>(net.active_weights()) /
                      static_cast<double>(net.total_weights());
  std::vector<LabeledSample> batch;
  for (std::size_t epoch = 0; epoch < cfg.train.epochs; ++epoch) {
    const auto order = epoch_order(train_data.size(), cfg.train.seed, epoch);
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.train.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.train.batch_size);
      batch.clear();
      for (std::size_t k = start; k < stop; ++k) batch.push_back(train_data.samples[order[k]]);
      // g(v, u) = mean over batch of sum_t dL/dI_v^t S_u^t (straight through the mask).
      const auto g = compute_gradients(net, batch, spec);
      correct += g.correct;
      for (std::size_t l = 0; l < net.depth(); ++l) {
        auto s = scores[l].flat();
        const auto w = net.layers[l].weights.flat();
        const auto gl = g.weights[l].flat();
        for (std::size_t k = 0; k < s.size(); ++k) {
          // Negative step: scores descend the loss.
          s[k] = score_update(s[k], -cfg.train.learning_rate, gl[k], 1.0, w[k]);
        }
      }
      apply_topk_masks(net, scores, cfg.keep_percent);
    }
    SearchEpoch rec;
    rec.epoch = epoch;
    rec.train_acc = static_cast<double>(correct) / static_cast<double>(train_data.size());
    rec.eval_acc = eval_data.empty() ? 0.0 : accuracy(net, eval_data);
    rec.sparsity = 1.0 - kept;
    res.trace.push_back(rec);
  }
  for (const auto& layer : net.layers) res.masks.push_back(layer.mask);
  res.scores = scores;
  return res;
}

}  // namespace snnlth
