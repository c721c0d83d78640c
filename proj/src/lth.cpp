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

#include "snnlth/lth.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>

#include "snnlth/errors.hpp"
#include "snnlth/prob_model.hpp"
#include "snnlth/rng.hpp"

namespace snnlth {

void LthBoundParams::validate() const {
  if (width == 0 || depth == 0 || timesteps == 0) {
    throw DomainError("LthBoundParams: N, L and T must be >= 1");
  }
  if (!(u_th < 1.0)) throw DomainError("LthBoundParams: u_th must be below 1 so that C_th > 0");
  if (!(eps > 0.0)) throw DomainError("LthBoundParams: eps must be positive");
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("LthBoundParams: delta must lie in (0, 1]");
  if (!(C >= 0.0) || !std::isfinite(C)) throw DomainError("LthBoundParams: C must be finite and >= 0");
}

double dataset_constant(double p_sup, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("dataset_constant: beta must lie in (0, 1)");
  return 2.0 * p_sup / (1.0 - beta);
}

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

// ceil(x) for x >= 0 as an integer; nonpositive x gives 0.
std::uint64_t ceil_count(double x) {
  if (!(x > 0.0)) return 0;
  const double c = std::ceil(x);
  if (c >= 1.8e19) return kSaturated;
  return static_cast<std::uint64_t>(c);
}

std::uint64_t times(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > kSaturated / a) return kSaturated;
  return a * b;
}

// ceil(n / (C_th eps) * log(arg)).
std::uint64_t block_count(const LthBoundParams& p, double n, double arg) {
  return ceil_count(n / (p.c_th() * p.eps) * std::log(arg));
}

double slack(const LthBoundParams& p, double exposure) {
  const double s = p.delta - static_cast<double>(p.width) * p.C * exposure * p.eps;
  if (!(s > 0.0)) {
    throw InfeasibleBoundError(
        "infeasible-bound: delta - N*C*L*T*eps = " + std::to_string(s) +
        " <= 0; shrink eps below " +
        std::to_string(p.delta / (static_cast<double>(p.width) * p.C * exposure)));
  }
  return s;
}

}  // namespace

std::uint64_t required_k_single(const LthBoundParams& p) {
  p.validate();
  return block_count(p, 1.0, 1.0 / p.delta);
}

std::uint64_t required_k_layer(const LthBoundParams& p) {
  p.validate();
  const double n = static_cast<double>(p.width);
  return times(p.width, block_count(p, n, n / p.delta));
}

std::uint64_t required_k_layer_to_layer(const LthBoundParams& p) {
  p.validate();
  const double n = static_cast<double>(p.width);
  return times(p.width, block_count(p, n, n * n / p.delta));
}

std::uint64_t required_k_layer_to_layer_short_log(const LthBoundParams& p) {
  return required_k_layer(p);
}

std::uint64_t required_k_activation(const LthBoundParams& p) {
  p.validate();
  const double n = static_cast<double>(p.width);
  const double s = slack(p, 1.0);
  return times(times(p.width, p.width), block_count(p, n, n * n / s));
}

std::uint64_t required_k_network(const LthBoundParams& p) {
  p.validate();
  const double n = static_cast<double>(p.width);
  const double lt = static_cast<double>(p.depth) * static_cast<double>(p.timesteps);
  const double s = slack(p, lt);
  return times(times(p.width, p.width),
               block_count(p, n, n * n * static_cast<double>(p.depth) / s));
}

double feasible_eps(const LthBoundParams& p, double fraction) {
  const double denom = static_cast<double>(p.width) * p.C * static_cast<double>(p.depth) *
                       static_cast<double>(p.timesteps);
  if (!(denom > 0.0)) throw DomainError("feasible_eps: N*C*L*T must be positive");
  return fraction * p.delta / denom;
}

EquivalentBlock select_virtual_neuron(std::vector<double> v_in, std::vector<double> w_out,
                                      double target, double eps, double u_th,
                                      SelectionRule rule) {
  if (v_in.size() != w_out.size()) throw DomainError("select_virtual_neuron: candidate lengths differ");
  EquivalentBlock b;
  b.mask.assign(v_in.size(), 0);
  for (std::size_t a = 0; a < v_in.size(); ++a) {
    const double err = std::abs(w_out[a] - target);
    if (v_in[a] < u_th || err > eps) continue;
    if (!b.active || err < b.error) {
      b.active = a;
      b.error = err;
      if (rule == SelectionRule::kFirstQualifying) break;
    }
  }
  if (b.active) b.mask[*b.active] = 1;
  b.v_in = std::move(v_in);
  b.w_out = std::move(w_out);
  return b;
}

EquivalentBlock construct_single_weight(double target, std::size_t k, double eps,
                                        double u_th, std::uint64_t seed, SelectionRule rule) {
  if (k == 0) throw DomainError("construct_single_weight: k must be >= 1");
  Rng rng(seed);
  std::vector<double> v(k), w(k);
  for (std::size_t a = 0; a < k; ++a) {
    v[a] = uniform(rng, -1.0, 1.0);
    w[a] = uniform(rng, -1.0, 1.0);
  }
  return select_virtual_neuron(std::move(v), std::move(w), target, eps, u_th, rule);
}

double EquivalentNetwork::max_linear_error() const {
  double worst = 0.0;
  for (const auto& dev : deviation) {
    // The worst binary input switches on every entry of one sign.
    for (std::size_t i = 0; i < dev.rows(); ++i) {
      double pos = 0.0, neg = 0.0;
      for (double d : dev.row(i)) (d > 0.0 ? pos : neg) += std::abs(d);
      worst = std::max({worst, pos, neg});
    }
  }
  return worst;
}

namespace {

struct Draw {
  double v;
  double w;
};

void check_admissible(const MaskedDenseLayer& layer, std::size_t l) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in_dim()));
  for (std::size_t i = 0; i < layer.out_dim(); ++i) {
    for (std::size_t j = 0; j < layer.in_dim(); ++j) {
      const double w = layer.effective_weight(i, j);
      if (std::abs(w) > bound * (1.0 + 1e-12)) {
        throw DomainError("construct_equivalent_network: layer " + std::to_string(l) +
                          " weight (" + std::to_string(i) + ", " + std::to_string(j) +
                          ") = " + std::to_string(w) + " outside [-1/sqrt(N), 1/sqrt(N)]");
      }
    }
  }
}

}  // namespace

EquivalentNetwork construct_equivalent_network(const SpikingNetwork& target,
                                               std::size_t k_per_layer, double eps,
                                               std::uint64_t seed,
                                               const ConstructionOptions& opts) {
  target.validate();
  if (!(eps > 0.0)) throw DomainError("construct_equivalent_network: eps must be positive");
  EquivalentNetwork eq;
  for (std::size_t l = 0; l < target.depth(); ++l) {
    const auto& tl = target.layers[l];
    const auto& p = target.params[l];
    check_admissible(tl, l);
    const std::size_t n_out = tl.out_dim(), n_in = tl.in_dim();
    const std::size_t blocks = n_out * n_in;
    const std::size_t kp = k_per_layer / blocks;
    if (kp == 0) {
      throw DomainError("construct_equivalent_network: k_per_layer = " + std::to_string(k_per_layer) +
                        " is smaller than the " + std::to_string(blocks) + " blocks of layer " +
                        std::to_string(l));
    }
    eq.block_size = kp;
    const double tol = eps / static_cast<double>(n_in);
    const std::size_t width = opts.compact ? blocks : k_per_layer;

    Matrix v(width, n_in, 0.0), w(n_out, width, 0.0);
    if (!opts.compact) {
      // Entries that the masks remove are still part of the random network.
      Rng fill(derive_seed(seed, {l, 0x66696c6cULL}));
      for (double& x : v.flat()) x = uniform(fill, -1.0, 1.0);
      for (double& x : w.flat()) x = uniform(fill, -1.0, 1.0);
    }
    MaskedDenseLayer virt(std::move(v));
    MaskedDenseLayer out(std::move(w));
    std::fill(virt.mask.flat().begin(), virt.mask.flat().end(), 0);
    std::fill(out.mask.flat().begin(), out.mask.flat().end(), 0);
    out.norm = tl.norm;

    Matrix achieved(n_out, n_in, 0.0), deviation(n_out, n_in, 0.0);
    for (std::size_t i = 0; i < n_out; ++i) {
      for (std::size_t j = 0; j < n_in; ++j) {
        const double w_hat = tl.effective_weight(i, j);
        const std::size_t block = i * n_in + j;
        Rng rng(derive_seed(seed, {l, i, j}));
        std::optional<Draw> chosen;
        std::size_t chosen_a = 0;
        for (std::size_t a = 0; a < kp; ++a) {
          if (opts.compact && chosen && opts.rule == SelectionRule::kFirstQualifying) break;
          const Draw d{uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)};
          if (!opts.compact) {
            const std::size_t idx = block * kp + a;
            virt.weights(idx, j) = d.v;
            virt.mask(idx, j) = 1;
            out.weights(i, idx) = d.w;
          }
          const double err = std::abs(d.w - w_hat);
          if (d.v >= p.u_th && err <= tol &&
              (!chosen || (opts.rule == SelectionRule::kBestError && err < std::abs(chosen->w - w_hat)))) {
            chosen = d;
            chosen_a = a;
          }
        }
        ++eq.blocks;
        if (!chosen) {
          ++eq.failed_blocks;
          deviation(i, j) = -w_hat;
          continue;
        }
        const std::size_t slot = opts.compact ? block : block * kp + chosen_a;
        if (opts.compact) {
          virt.weights(slot, j) = chosen->v;
          virt.mask(slot, j) = 1;
          out.weights(i, slot) = chosen->w;
        }
        out.mask(i, slot) = 1;
        achieved(i, j) = chosen->w;
        deviation(i, j) = chosen->w - w_hat;
      }
    }
    eq.net.add_layer(std::move(virt), p);
    eq.net.add_layer(std::move(out), p);
    eq.achieved.push_back(std::move(achieved));
    eq.deviation.push_back(std::move(deviation));
  }
  return eq;
}

RescaleResult rescale_to_admissible(const SpikingNetwork& target) {
  RescaleResult r{target, false};
  for (std::size_t l = 0; l < r.net.depth(); ++l) {
    auto& layer = r.net.layers[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in_dim()));
    double m = 0.0;
    for (double w : layer.weights.flat()) m = std::max(m, std::abs(w));
    if (m > bound) {
      const double f = bound / m;
      for (double& w : layer.weights.flat()) w *= f;
      r.scaled = true;
      std::cerr << "warning: layer " << l << " rescaled by " << f
                << " into the admissible weight range; firing relative to u_th changes\n";
    }
  }
  return r;
}

std::vector<double> equivalent_linear_map(const EquivalentNetwork& eq, std::size_t target_layer,
                                          std::span<const std::uint8_t> s) {
  const auto& virt = eq.net.layers.at(2 * target_layer);
  const auto& out = eq.net.layers.at(2 * target_layer + 1);
  LayerState st{std::vector<double>(virt.out_dim(), 0.0)};
  const auto hidden = layer_forward(virt, eq.net.params[2 * target_layer], s, st);
  std::vector<double> x(out.out_dim(), 0.0);
  for (std::size_t i = 0; i < out.out_dim(); ++i) {
    for (std::size_t k = 0; k < out.in_dim(); ++k) {
      if (hidden[k]) x[i] += out.effective_weight(i, k);
    }
  }
  return x;
}

Agreement measure_agreement(SpikingNetwork& a, SpikingNetwork& b,
                            const LabeledSpikeDataset& data) {
  if (data.empty()) throw DomainError("measure_agreement: empty dataset");
  if (a.input_width() != b.input_width() || a.output_width() != b.output_width()) {
    throw DomainError("measure_agreement: networks differ in input or output width");
  }
  Agreement r;
  double l2_sum = 0.0;
  for (const auto& s : data.samples) {
    const auto oa = network_forward(a, s.spikes);
    const auto ob = network_forward(b, s.spikes);
    double per_t = 0.0;
    for (std::size_t t = 0; t < oa.timesteps(); ++t) {
      std::size_t diff = 0;
      for (std::size_t i = 0; i < oa.width(); ++i) diff += oa.at(t, i) != ob.at(t, i);
      per_t += std::sqrt(static_cast<double>(diff));
    }
    l2_sum += per_t / static_cast<double>(oa.timesteps());
    r.matching += oa == ob;
    ++r.samples;
  }
  r.fraction = static_cast<double>(r.matching) / static_cast<double>(r.samples);
  r.mean_l2 = l2_sum / static_cast<double>(r.samples);
  return r;
}

SpikingNetwork random_target_network(std::size_t width, std::size_t depth,
                                     const LifParams& lif, std::uint64_t seed) {
  SpikingNetwork net;
  const double b = 1.0 / std::sqrt(static_cast<double>(width));
  for (std::size_t l = 0; l < depth; ++l) {
    Rng rng(derive_seed(seed, {0x746172ULL, l}));
    Matrix w(width, width);
    for (double& v : w.flat()) v = uniform(rng, -b, b);
    net.add_layer(MaskedDenseLayer(std::move(w)), lif);
  }
  return net;
}

SpikeTrain random_spike_input(std::size_t timesteps, std::size_t width, double rate,
                              std::uint64_t seed) {
  Rng rng(seed);
  SpikeTrain s(timesteps, width);
  for (std::size_t t = 0; t < timesteps; ++t) {
    for (std::size_t i = 0; i < width; ++i) s.set(t, i, bernoulli(rng, rate));
  }
  return s;
}

double pooled_p_sup(std::size_t width, std::size_t depth, std::size_t timesteps,
                    const LifParams& lif, double input_rate, std::size_t count,
                    std::uint64_t seed) {
  std::vector<double> potentials;
  for (std::size_t n = 0; n < count; ++n) {
    const auto net = random_target_network(width, depth, lif, derive_seed(seed, {n, 1}));
    const auto input = random_spike_input(timesteps, width, input_rate, derive_seed(seed, {n, 2}));
    const auto tr = record_forward(net, input);
    for (const auto& layer : tr.u) {
      for (const auto& step : layer) potentials.insert(potentials.end(), step.begin(), step.end());
    }
  }
  return summarize_potentials(potentials).p_sup;
}

LthExperimentResult run_lth_experiment(const LthExperimentConfig& cfg) {
  cfg.lif.validate();
  LthExperimentResult r;
  r.bounds = cfg.bounds;
  r.bounds.u_th = cfg.lif.u_th;
  const std::size_t N = r.bounds.width, L = r.bounds.depth, T = r.bounds.timesteps;
  if (cfg.measure_c) {
    r.p_sup = pooled_p_sup(N, L, T, cfg.lif, cfg.input_rate, cfg.pilot_targets,
                           derive_seed(cfg.seed, {0x70696c6f74ULL}));
    r.bounds.C = dataset_constant(r.p_sup, cfg.lif.beta);
  } else {
    r.p_sup = r.bounds.C * (1.0 - cfg.lif.beta) / 2.0;
  }
  if (cfg.auto_eps) r.bounds.eps = feasible_eps(r.bounds, cfg.eps_fraction);
  r.bounds.validate();

  r.k_single = required_k_single(r.bounds);
  r.k_layer = required_k_layer(r.bounds);
  r.k_layer_to_layer = required_k_layer_to_layer(r.bounds);
  r.k_layer_to_layer_short_log = required_k_layer_to_layer_short_log(r.bounds);
  r.k_activation = required_k_activation(r.bounds);
  r.k_network = required_k_network(r.bounds);

  ConstructionOptions opts;
  opts.compact = cfg.compact;
  opts.rule = cfg.rule;
  for (std::size_t n = 0; n < cfg.targets; ++n) {
    auto target = random_target_network(N, L, cfg.lif, derive_seed(cfg.seed, {n, 1}));
    LabeledSpikeDataset one;
    one.n_classes = 1;
    one.width = N;
    one.timesteps = T;
    one.samples.push_back(
        {random_spike_input(T, N, cfg.input_rate, derive_seed(cfg.seed, {n, 2})), 0});
    auto eq = construct_equivalent_network(target, r.k_network, r.bounds.eps,
                                           derive_seed(cfg.seed, {n, 3}), opts);
    r.blocks += eq.blocks;
    r.failed_blocks += eq.failed_blocks;
    r.trials_with_failed_blocks += eq.failed_blocks > 0;
    const auto a = measure_agreement(target, eq.net, one);
    r.agreement.matching += a.matching;
    r.agreement.samples += a.samples;
    r.agreement.mean_l2 += a.mean_l2;
  }
  if (r.agreement.samples > 0) {
    r.agreement.fraction = static_cast<double>(r.agreement.matching) /
                           static_cast<double>(r.agreement.samples);
    r.agreement.mean_l2 /= static_cast<double>(r.agreement.samples);
  }
  return r;
}

}  // namespace snnlth
