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

// Desk-scale experiments shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "snnlth/digest.hpp"
#include "snnlth/encode.hpp"
#include "snnlth/prob_model.hpp"
#include "snnlth/prune.hpp"
#include "snnlth/rng.hpp"
#include "snnlth/subnet_search.hpp"
#include "snnlth/train.hpp"

namespace snnlth::testing {

inline double binomial_sd(double p, std::size_t n) {
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// Single-neuron crisis check: u ~ N(mu, var), perturbation e ~ U[-eps, eps].
struct FlipCount {
  std::size_t trials = 0;
  std::size_t flips = 0;
  double bound = 0.0;
  double frequency() const { return static_cast<double>(flips) / static_cast<double>(trials); }
  double limit() const { return bound + 3.0 * binomial_sd(bound, trials); }
};

inline FlipCount crisis_monte_carlo(double eps, std::size_t trials, std::uint64_t seed,
                                    double mu = 0.0, double var = 1.0, double u_th = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(mu, std::sqrt(var));
  std::uniform_real_distribution<double> ud(-eps, eps);
  FlipCount c;
  c.trials = trials;
  for (std::size_t n = 0; n < trials; ++n) {
    const double u = nd(rng);
    const double up = u + ud(rng);
    c.flips += (u >= u_th) != (up >= u_th);
  }
  NeuronStats st;
  st.mu = mu;
  st.var = var;
  c.bound = crisis_probability(st, CrisisQuery{eps, u_th, 0.5, 1, 1});
  return c;
}

// ---------------------------------------------------------------------------
// Paired single-neuron runs with per-step input error <= eps. Trials whose
// spike histories differ before the last step are rejected.
struct TemporalCheck {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;  // max observed error / bound
};

inline TemporalCheck temporal_monte_carlo(double beta, std::size_t T, double eps,
                                          std::size_t accepted_target, std::uint64_t seed,
                                          double slack = 1e-12) {
  Rng rng(seed);
  const LifParams p{beta, 0.5, 0.0};
  const double bound = temporal_error_bound(eps, beta, T);
  TemporalCheck r;
  while (r.accepted < accepted_target) {
    double ha = 0.0, hb = 0.0;
    bool match = true;
    double ua = 0.0, ub = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const double x = uniform(rng, -0.4, 0.6);
      // Errors at the extremes of the allowed range stress the bound.
      const double e = bernoulli(rng, 0.5) ? eps * (bernoulli(rng, 0.5) ? 1.0 : -1.0)
                                           : uniform(rng, -eps, eps);
      ua = ha + x;
      ub = hb + x + e;
      const auto a = lif_step(ha, x, p);
      const auto b = lif_step(hb, x + e, p);
      if (t + 1 < T && a.spike != b.spike) {
        match = false;
        break;
      }
      ha = a.h_next;
      hb = b.h_next;
    }
    if (!match) {
      ++r.rejected;
      continue;
    }
    ++r.accepted;
    const double err = std::abs(ua - ub);
    r.worst_ratio = std::max(r.worst_ratio, err / bound);
    r.violations += err > bound + slack;
  }
  return r;
}

// ---------------------------------------------------------------------------
// One LIF layer (N outputs, N inputs) and a perturbed copy whose weights
// differ by at most eps / N, so every spatial input differs by at most eps.
// A trial counts a mismatch when any output differs at step T while the
// first T - 1 output steps agree; other trials are rejected.
struct LayerCheck {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t mismatches = 0;
  double p_sup = 0.0;
  double bound = 0.0;
  double frequency() const { return static_cast<double>(mismatches) / static_cast<double>(accepted); }
  double limit() const { return bound + 3.0 * binomial_sd(bound, accepted); }
};

inline LayerCheck layer_monte_carlo(std::size_t N, std::size_t T, double eps, double beta,
                                    std::size_t trials, std::uint64_t seed) {
  Rng rng(seed);
  const LifParams p{beta, 0.5, 0.0};
  Matrix w(N, N);
  const double b = 1.0 / std::sqrt(static_cast<double>(N));
  for (double& x : w.flat()) x = uniform(rng, -b, 2.0 * b);
  MaskedDenseLayer base(w);

  // Membrane statistics of the unperturbed layer at the last step.
  std::vector<std::vector<double>> us(N);
  for (std::size_t n = 0; n < 20000; ++n) {
    LayerState st{std::vector<double>(N, 0.0)};
    for (std::size_t t = 0; t < T; ++t) {
      std::vector<std::uint8_t> s(N);
      for (auto& v : s) v = bernoulli(rng, 0.5);
      std::vector<double> x(N);
      base.spatial_input(std::span<const std::uint8_t>(s), x);
      for (std::size_t i = 0; i < N; ++i) {
        if (t + 1 == T) us[i].push_back(st.h[i] + x[i]);
        st.h[i] = lif_step(st.h[i], x[i], p).h_next;
      }
    }
  }
  LayerCheck r;
  for (const auto& u : us) r.p_sup = std::max(r.p_sup, summarize_potentials(u).p_sup);
  r.bound = layer_flip_bound(r.p_sup, CrisisQuery{eps, p.u_th, beta, N, T});

  const double tol = eps / static_cast<double>(N);
  while (r.accepted + r.rejected < trials) {
    MaskedDenseLayer pert = base;
    for (double& x : pert.weights.flat()) x += uniform(rng, -tol, tol);
    LayerState sa{std::vector<double>(N, 0.0)}, sb = sa;
    bool match = true, mismatch_last = false;
    for (std::size_t t = 0; t < T; ++t) {
      std::vector<std::uint8_t> s(N);
      for (auto& v : s) v = bernoulli(rng, 0.5);
      const auto a = layer_forward(base, p, s, sa);
      const auto c = layer_forward(pert, p, s, sb);
      if (a != c) {
        if (t + 1 < T) {
          match = false;
          break;
        }
        mismatch_last = true;
      }
    }
    if (!match) {
      ++r.rejected;
      continue;
    }
    ++r.accepted;
    r.mismatches += mismatch_last;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Edge-popup on the synthetic task against random masks at equal sparsity.
// A surrogate window of 2 keeps a silent output neuron inside the gradient
// window; with width 1 a few seeds stall with one output never firing.
struct SearchExperiment {
  double searched_eval = 0.0;
  double baseline_mean = 0.0;
  double baseline_sd = 0.0;
  std::size_t baseline_count = 0;
  bool weights_unchanged = false;
  bool cardinality_ok = false;
};

inline SearchExperiment edge_popup_experiment(std::uint64_t seed, std::size_t epochs = 60,
                                              std::size_t baselines = 20) {
  SyntheticSpec spec{2, 16, 4, 0.05, 100, derive_seed(seed, {1})};
  const auto train = synthetic_patterns(spec);
  SyntheticSpec eval_spec = spec;
  eval_spec.first_sample = spec.count_per_class;
  const auto eval = synthetic_patterns(eval_spec);

  NetworkShape shape;
  shape.widths = {16, 32, 2};
  auto net = make_network(shape, derive_seed(seed, {2}));
  Digest before;
  for (const auto& l : net.layers) before.add(l.weights.flat());

  SearchConfig cfg;
  cfg.keep_percent = 50.0;
  cfg.train.epochs = epochs;
  cfg.train.learning_rate = 2.0;
  cfg.train.seed = derive_seed(seed, {3});
  auto scores = init_scores(net, derive_seed(seed, {4}));
  SearchExperiment r;
  edge_popup_train(net, scores, train, eval, cfg, SurrogateSpec{2.0});
  r.searched_eval = accuracy(net, eval);
  Digest after;
  for (const auto& l : net.layers) after.add(l.weights.flat());
  r.weights_unchanged = before.value() == after.value();
  r.cardinality_ok = true;
  for (std::size_t l = 0; l < net.depth(); ++l) {
    r.cardinality_ok &= net.layers[l].active_count() == kept_count(net.layers[l].weights.size(), 50.0);
  }

  std::vector<double> accs;
  for (std::size_t b = 0; b < baselines; ++b) {
    auto rnd = net;
    apply_topk_masks(rnd, init_scores(rnd, derive_seed(seed, {5, b})), 50.0);
    accs.push_back(accuracy(rnd, eval));
  }
  r.baseline_count = accs.size();
  r.baseline_mean = std::accumulate(accs.begin(), accs.end(), 0.0) / accs.size();
  double ss = 0.0;
  for (double a : accs) ss += (a - r.baseline_mean) * (a - r.baseline_mean);
  r.baseline_sd = accs.size() > 1 ? std::sqrt(ss / (accs.size() - 1)) : 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Prunes the lowest-P or highest-P fraction of a trained, fully normalized
// net and measures the mean Hamming distance of held-out output spikes.
struct DirectionResult {
  double low_p_distance = 0.0;
  double high_p_distance = 0.0;
};

inline double mean_hamming(SpikingNetwork& a, SpikingNetwork& b, const LabeledSpikeDataset& data) {
  double total = 0.0;
  for (const auto& s : data.samples) {
    const auto x = network_forward(a, s.spikes);
    const auto y = network_forward(b, s.spikes);
    for (std::size_t t = 0; t < x.timesteps(); ++t)
      for (std::size_t i = 0; i < x.width(); ++i) total += x.at(t, i) != y.at(t, i);
  }
  return total / static_cast<double>(data.size());
}

inline DirectionResult criterion_direction_trial(std::uint64_t seed, double fraction = 0.2) {
  SyntheticSpec spec{2, 16, 4, 0.1, 60, derive_seed(seed, {1})};
  const auto train = synthetic_patterns(spec);
  SyntheticSpec held = spec;
  held.first_sample = spec.count_per_class;
  const auto eval = synthetic_patterns(held);

  NetworkShape shape;
  shape.widths = {16, 24, 24, 2};
  shape.all_norm = true;
  auto net = make_network(shape, derive_seed(seed, {2}));
  calibrate_norm(net, train);
  TrainConfig tc;
  tc.epochs = 20;
  tc.seed = derive_seed(seed, {3});
  Trainer(tc, SurrogateSpec{}).train(net, train, 0, tc.epochs);
  calibrate_norm(net, train);

  const auto stats = estimate_membrane_stats(net, train);
  struct Entry {
    double p;
    std::size_t layer, flat;
  };
  std::vector<Entry> all;
  for (std::size_t l = 0; l < net.depth(); ++l) {
    const auto& layer = net.layers[l];
    const auto& norm = *layer.norm;
    for (std::size_t i = 0; i < layer.out_dim(); ++i)
      for (std::size_t j = 0; j < layer.in_dim(); ++j) {
        const double p = weight_flip_probability(
            stats[l].e_act_absw(i, j), NormScale{norm.gamma[i], norm.sigma_b[i], norm.eps_bn},
            stats[l].neurons[i], net.params[l].u_th);
        all.push_back({p, l, i * layer.in_dim() + j});
      }
  }
  std::stable_sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.p < b.p; });
  const std::size_t k = static_cast<std::size_t>(std::llround(fraction * all.size()));
  auto low = net, high = net;
  for (std::size_t n = 0; n < k; ++n) {
    low.layers[all[n].layer].mask.flat()[all[n].flat] = 0;
    const auto& e = all[all.size() - 1 - n];
    high.layers[e.layer].mask.flat()[e.flat] = 0;
  }
  DirectionResult r;
  r.low_p_distance = mean_hamming(net, low, eval);
  r.high_p_distance = mean_hamming(net, high, eval);
  return r;
}

}  // namespace snnlth::testing
