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

#include "snnlth/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "snnlth/errors.hpp"
#include "snnlth/rng.hpp"

namespace snnlth {

void SurrogateSpec::validate() const {
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw DomainError("SurrogateSpec: width must be positive");
  }
}

double surrogate_grad(double u, const LifParams& params, const SurrogateSpec& spec) {
  return std::abs(u - params.u_th) < spec.width / 2 ? 1.0 / spec.width : 0.0;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw DomainError("TrainConfig: learning_rate must be finite and >= 0");
  }
  if (batch_size == 0) throw DomainError("TrainConfig: batch_size must be >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw DomainError("TrainConfig: momentum must lie in [0, 1)");
  }
}

namespace {

std::vector<double> softmax(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) sum += (p[i] = std::exp(z[i] - m));
  for (double& v : p) v /= sum;
  return p;
}

}  // namespace

double rate_loss(std::span<const double> rates, std::size_t label) {
  if (label >= rates.size()) {
    throw DomainError("rate_loss: label " + std::to_string(label) + " out of range for " +
                      std::to_string(rates.size()) + " classes");
  }
  const double m = *std::max_element(rates.begin(), rates.end());
  double sum = 0.0;
  for (double z : rates) sum += std::exp(z - m);
  return m + std::log(sum) - rates[label];
}

double rate_loss(const SpikeTrain& output, std::size_t label) {
  std::vector<double> rates(output.width(), 0.0);
  for (std::size_t t = 0; t < output.timesteps(); ++t) {
    for (std::size_t i = 0; i < rates.size(); ++i) rates[i] += output.at(t, i);
  }
  for (double& r : rates) r /= static_cast<double>(output.timesteps());
  return rate_loss(rates, label);
}

std::size_t predict(const SpikeTrain& output) {
  std::size_t best = 0, best_count = 0;
  for (std::size_t i = 0; i < output.width(); ++i) {
    std::size_t c = 0;
    for (std::size_t t = 0; t < output.timesteps(); ++t) c += output.at(t, i);
    if (i == 0 || c > best_count) {
      best = i;
      best_count = c;
    }
  }
  return best;
}

double accuracy(SpikingNetwork& net, const LabeledSpikeDataset& data) {
  if (data.empty()) return 0.0;
  std::size_t ok = 0;
  for (const auto& s : data.samples) ok += predict(network_forward(net, s.spikes)) == s.label;
  return static_cast<double>(ok) / static_cast<double>(data.size());
}

namespace {

// Accumulates dL/dW_eff of one sample into `grads`; returns the sample loss.
double backward_sample(const SpikingNetwork& net, const LabeledSample& sample,
                       const SurrogateSpec& spec, Activation act,
                       std::vector<Matrix>& grads, bool& correct) {
  const auto tr = record_forward(net, sample.spikes, act, spec.width);
  const auto rates = tr.output_rates();
  const double loss = rate_loss(rates, sample.label);
  {
    std::size_t best = 0;
    for (std::size_t i = 1; i < rates.size(); ++i) {
      if (rates[i] > rates[best]) best = i;
    }
    correct = best == sample.label;
  }

  auto dz = softmax(rates);
  dz[sample.label] -= 1.0;
  const std::size_t L = net.depth();
  const std::size_t T = tr.timesteps;
  const double inv_t = 1.0 / static_cast<double>(T);

  std::vector<std::vector<double>> dh(L), ds(L);
  for (std::size_t l = 0; l < L; ++l) dh[l].assign(net.layers[l].out_dim(), 0.0);

  for (std::size_t t = T; t-- > 0;) {
    for (std::size_t l = 0; l < L; ++l) ds[l].assign(net.layers[l].out_dim(), 0.0);
    for (std::size_t c = 0; c < dz.size(); ++c) ds[L - 1][c] = dz[c] * inv_t;

    for (std::size_t l = L; l-- > 0;) {
      const auto& layer = net.layers[l];
      const auto& p = net.params[l];
      const auto& u = tr.u[l][t];
      const auto& s_in = tr.inputs[l][t];
      std::vector<double> dx(layer.out_dim());
      for (std::size_t i = 0; i < dx.size(); ++i) {
        const double keep = u[i] >= p.u_th ? 0.0 : 1.0;
        const double du = ds[l][i] * surrogate_grad(u[i], p, spec) + dh[l][i] * p.beta * keep;
        dh[l][i] = du;
        dx[i] = layer.norm ? du * layer.norm->scale(i) : du;
      }
      auto& g = grads[l];
      for (std::size_t i = 0; i < dx.size(); ++i) {
        if (dx[i] == 0.0) continue;
        auto row = g.row(i);
        for (std::size_t j = 0; j < s_in.size(); ++j) row[j] += dx[i] * s_in[j];
      }
      if (l > 0) {
        auto& ds_prev = ds[l - 1];
        for (std::size_t i = 0; i < dx.size(); ++i) {
          if (dx[i] == 0.0) continue;
          for (std::size_t j = 0; j < ds_prev.size(); ++j) {
            ds_prev[j] += layer.effective_weight(i, j) * dx[i];
          }
        }
      }
    }
  }
  return loss;
}

void check_batch(const SpikingNetwork& net, std::span<const LabeledSample> batch) {
  if (batch.empty()) throw DomainError("empty batch");
  for (const auto& s : batch) {
    if (s.spikes.width() != net.input_width()) {
      throw DomainError("batch sample width does not match network input width");
    }
    if (s.label >= net.output_width()) throw DomainError("batch label out of range");
  }
}

}  // namespace

Gradients compute_gradients(const SpikingNetwork& net,
                            std::span<const LabeledSample> batch,
                            const SurrogateSpec& spec, Activation act) {
  check_batch(net, batch);
  spec.validate();
  Gradients g;
  for (const auto& layer : net.layers) g.weights.emplace_back(layer.out_dim(), layer.in_dim(), 0.0);
  for (const auto& s : batch) {
    bool ok = false;
    g.loss += backward_sample(net, s, spec, act, g.weights, ok);
    g.correct += ok;
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  g.loss *= inv_n;
  for (auto& m : g.weights) {
    for (double& v : m.flat()) v *= inv_n;
  }
  return g;
}

double batch_loss(const SpikingNetwork& net, std::span<const LabeledSample> batch,
                  const SurrogateSpec& spec, Activation act) {
  check_batch(net, batch);
  double loss = 0.0;
  for (const auto& s : batch) {
    loss += rate_loss(record_forward(net, s.spikes, act, spec.width).output_rates(), s.label);
  }
  return loss / static_cast<double>(batch.size());
}

double bptt_step(SpikingNetwork& net, std::span<const LabeledSample> batch,
                 const TrainConfig& cfg, const SurrogateSpec& spec) {
  cfg.validate();
  const auto g = compute_gradients(net, batch, spec);
  for (std::size_t l = 0; l < net.depth(); ++l) {
    auto& layer = net.layers[l];
    auto w = layer.weights.flat();
    auto m = layer.mask.flat();
    auto gl = g.weights[l].flat();
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (m[k]) w[k] -= cfg.learning_rate * gl[k];
    }
  }
  return g.loss;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, {0x65706f6368ULL, epoch}));
  // Fisher-Yates with an explicit index draw so the order is library independent.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

Trainer::Trainer(TrainConfig cfg, SurrogateSpec spec) : cfg_(cfg), spec_(spec) {
  cfg_.validate();
  spec_.validate();
}

EpochStats Trainer::train_epoch(SpikingNetwork& net, const LabeledSpikeDataset& data,
                                std::size_t epoch) {
  if (data.empty()) throw DomainError("train: empty dataset");
  if (velocity_.size() != net.depth()) {
    velocity_.clear();
    for (const auto& layer : net.layers) velocity_.emplace_back(layer.out_dim(), layer.in_dim(), 0.0);
  }
  const auto order = epoch_order(data.size(), cfg_.seed, epoch);
  EpochStats st;
  st.epoch = epoch;
  std::size_t correct = 0;
  std::vector<LabeledSample> batch;
  for (std::size_t start = 0; start < order.size(); start += cfg_.batch_size) {
    const std::size_t stop = std::min(order.size(), start + cfg_.batch_size);
    batch.clear();
    for (std::size_t k = start; k < stop; ++k) batch.push_back(data.samples[order[k]]);
    const auto g = compute_gradients(net, batch, spec_);
    st.loss += g.loss * static_cast<double>(batch.size());
    correct += g.correct;
    for (std::size_t l = 0; l < net.depth(); ++l) {
      const bool gate = l >= update_masked_.size() || update_masked_[l];
      auto w = net.layers[l].weights.flat();
      auto m = net.layers[l].mask.flat();
      auto v = velocity_[l].flat();
      auto gl = g.weights[l].flat();
      for (std::size_t k = 0; k < w.size(); ++k) {
        if (gate && !m[k]) continue;
        if (cfg_.momentum > 0.0) {
          v[k] = cfg_.momentum * v[k] + gl[k];
          w[k] -= cfg_.learning_rate * v[k];
        } else {
          w[k] -= cfg_.learning_rate * gl[k];
        }
      }
    }
  }
  st.loss /= static_cast<double>(data.size());
  st.train_acc = static_cast<double>(correct) / static_cast<double>(data.size());
  return st;
}

std::vector<EpochStats> Trainer::train(SpikingNetwork& net, const LabeledSpikeDataset& data,
                                       std::size_t first_epoch, std::size_t n_epochs) {
  std::vector<EpochStats> out;
  for (std::size_t e = 0; e < n_epochs; ++e) out.push_back(train_epoch(net, data, first_epoch + e));
  return out;
}

SpikingNetwork make_network(const NetworkShape& shape, std::uint64_t seed) {
  if (shape.widths.size() < 2) throw DomainError("make_network: need at least input and output widths");
  shape.params.validate();
  SpikingNetwork net;
  const std::size_t L = shape.widths.size() - 1;
  for (std::size_t l = 0; l < L; ++l) {
    const std::size_t n_in = shape.widths[l], n_out = shape.widths[l + 1];
    if (n_in == 0 || n_out == 0) throw DomainError("make_network: zero layer width");
    Rng rng(derive_seed(seed, {0x696e6974ULL, l}));
    const double b = shape.init_scale * std::sqrt(3.0 / static_cast<double>(n_in));
    Matrix w(n_out, n_in);
    for (double& v : w.flat()) v = uniform(rng, -b, b);
    MaskedDenseLayer layer(std::move(w));
    const bool hidden = l + 1 < L;
    if (shape.all_norm || (shape.hidden_norm && hidden)) layer.norm = NormParams::unit(n_out);
    net.add_layer(std::move(layer), shape.params);
  }
  return net;
}

void calibrate_norm(SpikingNetwork& net, const LabeledSpikeDataset& data) {
  if (data.empty()) throw DomainError("calibrate_norm: empty dataset");
  for (std::size_t l = 0; l < net.depth(); ++l) {
    auto& layer = net.layers[l];
    if (!layer.norm) continue;
    const std::size_t n = layer.out_dim();
    std::vector<double> sum(n, 0.0), sum_sq(n, 0.0);
    std::size_t count = 0;
    for (const auto& s : data.samples) {
      const auto tr = record_forward(net, s.spikes);
      for (const auto& s_in : tr.inputs[l]) {
        for (std::size_t i = 0; i < n; ++i) {
          double acc = 0.0;
          for (std::size_t j = 0; j < s_in.size(); ++j) acc += layer.effective_weight(i, j) * s_in[j];
          sum[i] += acc;
          sum_sq[i] += acc * acc;
        }
        ++count;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double mean = sum[i] / static_cast<double>(count);
      const double var = std::max(0.0, sum_sq[i] / static_cast<double>(count) - mean * mean);
      layer.norm->mu_b[i] = mean;
      layer.norm->sigma_b[i] = std::sqrt(var);
    }
  }
}

}  // namespace snnlth
