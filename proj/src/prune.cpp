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

#include "snnlth/prune.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "snnlth/digest.hpp"
#include "snnlth/errors.hpp"

namespace snnlth {

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::kMagnitude: return "magnitude";
    case Criterion::kSf1: return "sf1";
    case Criterion::kSf2: return "sf2";
  }
  return "unknown";
}

Criterion parse_criterion(const std::string& s) {
  if (s == "magnitude") return Criterion::kMagnitude;
  if (s == "sf1") return Criterion::kSf1;
  if (s == "sf2") return Criterion::kSf2;
  throw ConfigError("unknown criterion '" + s + "' (expected magnitude, sf1 or sf2)");
}

LayerRole layer_role(std::size_t layer, std::size_t depth) {
  if (layer == 0) return LayerRole::kEncoding;
  if (layer + 1 == depth) return LayerRole::kReadout;
  return LayerRole::kHidden;
}

bool sf_imp2_mask_policy(LayerRole role, MaskPhase phase, Criterion criterion) {
  if (role == LayerRole::kHidden || criterion != Criterion::kSf2) return true;
  return phase == MaskPhase::kLoss;
}

Matrix magnitude_scores(const MaskedDenseLayer& layer) {
  Matrix s(layer.out_dim(), layer.in_dim());
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t j = 0; j < s.cols(); ++j) {
      s(i, j) = layer.mask(i, j) ? std::abs(layer.weights(i, j))
                                 : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return s;
}

Matrix sf_scores(const MaskedDenseLayer& layer, const MembraneStats& stats, double u_th) {
  if (!layer.norm) return magnitude_scores(layer);
  if (stats.neurons.size() != layer.out_dim() || !stats.e_act_absw.same_shape(layer.weights)) {
    throw DomainError("sf_scores: statistics do not match the layer shape");
  }
  Matrix s(layer.out_dim(), layer.in_dim());
  for (std::size_t i = 0; i < s.rows(); ++i) {
    const NormScale ns{layer.norm->gamma[i], layer.norm->sigma_b[i], layer.norm->eps_bn};
    for (std::size_t j = 0; j < s.cols(); ++j) {
      s(i, j) = layer.mask(i, j)
                    ? weight_flip_probability(stats.e_act_absw(i, j), ns, stats.neurons[i], u_th)
                    : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return s;
}

void ImpConfig::validate() const {
  if (!(rate > 0.0 && rate < 100.0)) throw ConfigError("prune rate must lie in (0, 100)");
  if (rewind_epoch > epochs) throw ConfigError("rewind epoch must not exceed the training epochs");
}

std::size_t scheduled_count(std::size_t n, double rate, std::size_t round) {
  const double keep = std::pow(1.0 - rate / 100.0, static_cast<double>(round));
  return static_cast<std::size_t>(std::llround(static_cast<double>(n) * keep));
}

namespace {

struct Entry {
  double score;
  std::size_t layer;
  std::size_t index;
};

// Layers ranked together, with their size before any pruning.
struct Pool {
  std::vector<std::size_t> layers;
  std::size_t base = 0;
  bool from_scratch = false;  // recompute the mask over all entries
};

std::vector<Pool> make_pools(const SpikingNetwork& net, const ImpConfig& cfg) {
  const std::size_t L = net.depth();
  std::vector<Pool> pools;
  Pool p_pool, m_pool;
  for (std::size_t l = 0; l < L; ++l) {
    const auto role = layer_role(l, L);
    const bool edge = role != LayerRole::kHidden;
    const auto n = net.layers[l].weights.size();
    if (cfg.criterion == Criterion::kSf2 && edge) {
      pools.push_back({{l}, n, true});
      continue;
    }
    const bool by_p = cfg.criterion != Criterion::kMagnitude && !edge && net.layers[l].norm;
    if (cfg.scope == PruneScope::kPerLayer) {
      pools.push_back({{l}, n, false});
      continue;
    }
    auto& pool = by_p ? p_pool : m_pool;
    pool.layers.push_back(l);
    pool.base += n;
  }
  if (!p_pool.layers.empty()) pools.push_back(p_pool);
  if (!m_pool.layers.empty()) pools.push_back(m_pool);
  return pools;
}

void prune_pool(SpikingNetwork& net, const std::vector<Matrix>& scores, const Pool& pool,
                double rate, std::size_t round) {
  std::vector<Entry> entries;
  for (std::size_t l : pool.layers) {
    const auto& layer = net.layers[l];
    const auto s = scores[l].flat();
    const auto m = layer.mask.flat();
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (pool.from_scratch) {
        entries.push_back({std::abs(layer.weights.flat()[k]), l, k});
      } else if (m[k]) {
        entries.push_back({s[k], l, k});
      }
    }
  }
  std::size_t current = 0;
  for (std::size_t l : pool.layers) current += net.layers[l].active_count();
  std::size_t target = scheduled_count(pool.base, rate, round);
  if (!pool.from_scratch) {
    target = std::min(target, current);
    if (target == current && current > 0) --target;
  } else if (target >= current && current > 0) {
    target = current - 1;
  }
  // Highest scores first; ties keep the earlier (layer, index).
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.score > b.score;
  });
  for (std::size_t l : pool.layers) {
    auto m = net.layers[l].mask.flat();
    std::fill(m.begin(), m.end(), 0);
  }
  for (std::size_t r = 0; r < target && r < entries.size(); ++r) {
    net.layers[entries[r].layer].mask.flat()[entries[r].index] = 1;
  }
}

bool any_sf_layer(const SpikingNetwork& net) {
  for (std::size_t l = 0; l < net.depth(); ++l) {
    if (layer_role(l, net.depth()) == LayerRole::kHidden && net.layers[l].norm) return true;
  }
  return false;
}

}  // namespace

PruneTrajectory imp_run(SpikingNetwork& net, const LabeledSpikeDataset& train_data,
                        const LabeledSpikeDataset& eval_data, const ImpConfig& cfg,
                        const TrainConfig& train_cfg, const SurrogateSpec& spec,
                        const RewindObserver& observer) {
  cfg.validate();
  net.validate();
  if (train_data.empty()) throw DomainError("imp_run: empty training data");
  if (cfg.criterion != Criterion::kMagnitude && !any_sf_layer(net)) {
    throw ConfigError("criterion " + to_string(cfg.criterion) +
                      " needs a hidden layer with normalization to estimate membrane statistics");
  }
  const std::size_t L = net.depth();
  std::vector<bool> update_masked(L);
  for (std::size_t l = 0; l < L; ++l) {
    update_masked[l] = sf_imp2_mask_policy(layer_role(l, L), MaskPhase::kUpdate, cfg.criterion);
  }
  const auto evaluate = [&] { return eval_data.empty() ? 0.0 : accuracy(net, eval_data); };
  const auto snapshot = [&](std::size_t k, std::uint64_t digest) {
    ImpIteration it;
    it.iteration = k;
    for (const auto& layer : net.layers) it.masks.push_back(layer.mask);
    it.remaining = net.active_weights();
    it.sparsity = 1.0 - static_cast<double>(it.remaining) / static_cast<double>(net.total_weights());
    it.eval_acc = evaluate();
    it.scores_digest = digest;
    return it;
  };

  PruneTrajectory traj;
  traj.criterion = cfg.criterion;

  Trainer trainer(train_cfg, spec);
  trainer.set_update_masked(update_masked);
  trainer.train(net, train_data, 0, cfg.rewind_epoch);
  const SpikingNetwork rewind = net;
  for (const auto& layer : rewind.layers) traj.rewind_weights.push_back(layer.weights);
  trainer.train(net, train_data, cfg.rewind_epoch, cfg.epochs - cfg.rewind_epoch);
  traj.iterations.push_back(snapshot(0, 0));

  const auto pools = make_pools(net, cfg);
  for (std::size_t k = 1; k <= cfg.iterations; ++k) {
    std::vector<Matrix> scores;
    if (cfg.criterion == Criterion::kMagnitude) {
      for (const auto& layer : net.layers) scores.push_back(magnitude_scores(layer));
    } else {
      const auto stats = estimate_membrane_stats(net, train_data);
      for (std::size_t l = 0; l < L; ++l) {
        scores.push_back(layer_role(l, L) == LayerRole::kHidden
                             ? sf_scores(net.layers[l], stats[l], net.params[l].u_th)
                             : magnitude_scores(net.layers[l]));
      }
    }
    Digest digest;
    for (const auto& s : scores) digest.add(s.flat());
    for (const auto& pool : pools) prune_pool(net, scores, pool, cfg.rate, k);

    for (std::size_t l = 0; l < L; ++l) {
      auto& layer = net.layers[l];
      const bool masked = sf_imp2_mask_policy(layer_role(l, L), MaskPhase::kRewind, cfg.criterion);
      layer.norm = rewind.layers[l].norm;
      auto w = layer.weights.flat();
      const auto w0 = rewind.layers[l].weights.flat();
      const auto m = layer.mask.flat();
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = (!masked || m[i]) ? w0[i] : 0.0;
    }
    if (observer) observer(k, net);

    Trainer retrain(train_cfg, spec);
    retrain.set_update_masked(update_masked);
    retrain.train(net, train_data, cfg.rewind_epoch, cfg.epochs);
    traj.iterations.push_back(snapshot(k, digest.value()));
  }
  return traj;
}

}  // namespace snnlth
