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

#include "snnlth/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "snnlth/errors.hpp"

namespace snnlth {

void LifParams::validate() const {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw DomainError("LifParams: beta must lie in (0, 1), got " + std::to_string(beta));
  }
  if (!std::isfinite(u_th) || !std::isfinite(v_reset)) {
    throw DomainError("LifParams: u_th and v_reset must be finite");
  }
  if (!(v_reset < u_th)) throw DomainError("LifParams: v_reset must be below u_th");
}

std::size_t SpikeTrain::count() const {
  std::size_t n = 0;
  for (auto b : bits_.flat()) n += b;
  return n;
}

void SpikeTrain::validate() const {
  if (timesteps() == 0 || width() == 0) {
    throw DomainError("SpikeTrain: needs T >= 1 and N >= 1");
  }
  for (auto b : bits_.flat()) {
    if (b > 1) throw DomainError("SpikeTrain: entries must be 0 or 1");
  }
}

NormParams NormParams::unit(std::size_t n) {
  NormParams p;
  p.gamma.assign(n, 1.0);
  p.sigma_b.assign(n, 1.0);
  p.mu_b.assign(n, 0.0);
  p.shift.assign(n, 0.0);
  return p;
}

double NormParams::scale(std::size_t i) const {
  return gamma[i] / std::sqrt(sigma_b[i] * sigma_b[i] + eps_bn);
}

void NormParams::validate() const {
  const auto n = gamma.size();
  if (sigma_b.size() != n || mu_b.size() != n || shift.size() != n) {
    throw DomainError("NormParams: parameter vectors differ in length");
  }
  if (!(eps_bn > 0.0)) throw DomainError("NormParams: eps_bn must be positive");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(sigma_b[i] >= 0.0)) throw DomainError("NormParams: sigma_b must be >= 0");
    if (!std::isfinite(gamma[i]) || !std::isfinite(mu_b[i]) || !std::isfinite(shift[i])) {
      throw DomainError("NormParams: non-finite parameter");
    }
  }
}

MaskedDenseLayer::MaskedDenseLayer(Matrix w)
    : weights(std::move(w)), mask(weights.rows(), weights.cols(), 1) {}

std::size_t MaskedDenseLayer::active_count() const {
  std::size_t n = 0;
  for (auto b : mask.flat()) n += b;
  return n;
}

void MaskedDenseLayer::validate() const {
  if (!mask.same_shape(weights)) throw DomainError("MaskedDenseLayer: mask shape differs from weights");
  for (auto b : mask.flat()) {
    if (b > 1) throw DomainError("MaskedDenseLayer: mask entries must be 0 or 1");
  }
  for (double w : weights.flat()) {
    if (!std::isfinite(w)) throw DomainError("MaskedDenseLayer: non-finite weight");
  }
  if (norm) {
    norm->validate();
    if (norm->size() != out_dim()) throw DomainError("MaskedDenseLayer: norm width differs from N_out");
  }
}

namespace {

template <typename S>
void spatial_input_impl(const MaskedDenseLayer& layer, std::span<const S> s,
                        std::span<double> x) {
  if (s.size() != layer.in_dim() || x.size() != layer.out_dim()) {
    throw DomainError("layer input: expected " + std::to_string(layer.in_dim()) +
                      " inputs and " + std::to_string(layer.out_dim()) +
                      " outputs, got " + std::to_string(s.size()) + " and " +
                      std::to_string(x.size()));
  }
  const std::size_t n_in = layer.in_dim();
  for (std::size_t i = 0; i < layer.out_dim(); ++i) {
    const auto w = layer.weights.row(i);
    const auto m = layer.mask.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < n_in; ++j) {
      if (m[j] && s[j] != S{0}) acc += w[j] * static_cast<double>(s[j]);
    }
    x[i] = layer.norm ? layer.norm->scale(i) * acc + layer.norm->bias(i) : acc;
  }
}

}  // namespace

void MaskedDenseLayer::spatial_input(std::span<const std::uint8_t> s,
                                     std::span<double> x) const {
  spatial_input_impl(*this, s, x);
}

void MaskedDenseLayer::spatial_input(std::span<const double> s,
                                     std::span<double> x) const {
  spatial_input_impl(*this, s, x);
}

void SpikingNetwork::add_layer(MaskedDenseLayer layer, const LifParams& p) {
  if (!layers.empty() && layers.back().out_dim() != layer.in_dim()) {
    throw DomainError("add_layer: input width " + std::to_string(layer.in_dim()) +
                      " does not match previous output width " +
                      std::to_string(layers.back().out_dim()));
  }
  states.push_back(LayerState{std::vector<double>(layer.out_dim(), 0.0)});
  layers.push_back(std::move(layer));
  params.push_back(p);
}

std::size_t SpikingNetwork::input_width() const {
  return layers.empty() ? 0 : layers.front().in_dim();
}

std::size_t SpikingNetwork::output_width() const {
  return layers.empty() ? 0 : layers.back().out_dim();
}

void SpikingNetwork::reset_state() {
  states.resize(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    states[l].h.assign(layers[l].out_dim(), 0.0);
  }
}

void SpikingNetwork::validate() const {
  if (layers.empty()) throw DomainError("SpikingNetwork: no layers");
  if (params.size() != layers.size()) throw DomainError("SpikingNetwork: one LifParams per layer required");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].validate();
    params[l].validate();
    if (l > 0 && layers[l - 1].out_dim() != layers[l].in_dim()) {
      throw DomainError("SpikingNetwork: layer " + std::to_string(l) +
                        " input width does not match previous layer");
    }
  }
}

std::size_t SpikingNetwork::total_weights() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size();
  return n;
}

std::size_t SpikingNetwork::active_weights() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.active_count();
  return n;
}

LifStep lif_step(double h_prev, double x, const LifParams& params) {
  if (!std::isfinite(h_prev) || !std::isfinite(x)) {
    throw DomainError("lif_step: non-finite input");
  }
  const double u = h_prev + x;
  if (u >= params.u_th) return {true, params.v_reset};
  return {false, params.beta * u};
}

std::vector<std::uint8_t> layer_forward(const MaskedDenseLayer& layer,
                                        const LifParams& params,
                                        std::span<const std::uint8_t> s_in,
                                        LayerState& state) {
  if (state.h.size() != layer.out_dim()) {
    throw DomainError("layer_forward: state width " + std::to_string(state.h.size()) +
                      " does not match N_out " + std::to_string(layer.out_dim()));
  }
  std::vector<double> x(layer.out_dim());
  layer.spatial_input(s_in, x);
  std::vector<std::uint8_t> out(layer.out_dim());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto step = lif_step(state.h[i], x[i], params);
    out[i] = step.spike ? 1 : 0;
    state.h[i] = step.h_next;
  }
  return out;
}

namespace {

void check_input(const SpikingNetwork& net, const SpikeTrain& input) {
  if (net.layers.empty()) throw DomainError("network_forward: empty network");
  if (input.width() != net.input_width()) {
    throw DomainError("network_forward: input width " + std::to_string(input.width()) +
                      " does not match network input width " +
                      std::to_string(net.input_width()));
  }
}

}  // namespace

std::vector<SpikeTrain> network_forward_all(SpikingNetwork& net,
                                            const SpikeTrain& input) {
  check_input(net, input);
  net.reset_state();
  const std::size_t T = input.timesteps();
  std::vector<SpikeTrain> out;
  out.reserve(net.depth());
  for (const auto& layer : net.layers) out.emplace_back(T, layer.out_dim());
  for (std::size_t t = 0; t < T; ++t) {
    std::span<const std::uint8_t> s = input.step(t);
    for (std::size_t l = 0; l < net.depth(); ++l) {
      auto spikes = layer_forward(net.layers[l], net.params[l], s, net.states[l]);
      std::copy(spikes.begin(), spikes.end(), out[l].step(t).begin());
      s = out[l].step(t);
    }
  }
  return out;
}

SpikeTrain network_forward(SpikingNetwork& net, const SpikeTrain& input) {
  check_input(net, input);
  net.reset_state();
  const std::size_t T = input.timesteps();
  SpikeTrain out(T, net.output_width());
  std::vector<std::uint8_t> buf;
  for (std::size_t t = 0; t < T; ++t) {
    buf.assign(input.step(t).begin(), input.step(t).end());
    for (std::size_t l = 0; l < net.depth(); ++l) {
      buf = layer_forward(net.layers[l], net.params[l], buf, net.states[l]);
    }
    std::copy(buf.begin(), buf.end(), out.step(t).begin());
  }
  return out;
}

std::vector<double> ForwardTrace::output_rates() const {
  std::vector<double> rates;
  if (spikes.empty() || timesteps == 0) return rates;
  const auto& last = spikes.back();
  rates.assign(last.front().size(), 0.0);
  for (const auto& step : last) {
    for (std::size_t i = 0; i < rates.size(); ++i) rates[i] += step[i];
  }
  for (double& r : rates) r /= static_cast<double>(timesteps);
  return rates;
}

ForwardTrace record_forward(const SpikingNetwork& net, const SpikeTrain& input,
                            Activation act, double ramp_width) {
  check_input(net, input);
  const std::size_t L = net.depth();
  const std::size_t T = input.timesteps();
  ForwardTrace tr;
  tr.timesteps = T;
  tr.inputs.resize(L);
  tr.x.resize(L);
  tr.u.resize(L);
  tr.spikes.resize(L);
  std::vector<std::vector<double>> h(L);
  for (std::size_t l = 0; l < L; ++l) h[l].assign(net.layers[l].out_dim(), 0.0);

  for (std::size_t t = 0; t < T; ++t) {
    std::vector<double> s(input.step(t).begin(), input.step(t).end());
    for (std::size_t l = 0; l < L; ++l) {
      const auto& layer = net.layers[l];
      const auto& p = net.params[l];
      std::vector<double> x(layer.out_dim()), u(layer.out_dim()), out(layer.out_dim());
      layer.spatial_input(std::span<const double>(s), x);
      for (std::size_t i = 0; i < x.size(); ++i) {
        u[i] = h[l][i] + x[i];
        const bool fired = u[i] >= p.u_th;
        if (act == Activation::kHeaviside) {
          out[i] = fired ? 1.0 : 0.0;
        } else {
          out[i] = std::clamp((u[i] - p.u_th) / ramp_width + 0.5, 0.0, 1.0);
        }
        h[l][i] = fired ? p.v_reset : p.beta * u[i];
      }
      tr.inputs[l].push_back(std::move(s));
      tr.x[l].push_back(std::move(x));
      tr.u[l].push_back(std::move(u));
      s = out;
      tr.spikes[l].push_back(std::move(out));
    }
  }
  return tr;
}

}  // namespace snnlth
