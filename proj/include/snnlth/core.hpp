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

// Iterative leaky integrate-and-fire dynamics for dense spiking networks.
//
//   u^t = h^{t-1} + x^t
//   s^t = Hea(u^t - u_th)             (Hea(0) = 1)
//   h^t = v_reset * s^t + beta * u^t * (1 - s^t)
//   x^t = sum_j (w_ij * mask_ij) * s_j^{t, l-1}, optionally followed by a
//         per-neuron affine normalization.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "snnlth/grid.hpp"

namespace snnlth {

struct LifParams {
  double beta = 0.5;     // decay factor, 0 < beta < 1
  double u_th = 0.5;     // firing threshold
  double v_reset = 0.0;  // potential after a spike, must be below u_th

  void validate() const;
  friend bool operator==(const LifParams&, const LifParams&) = default;
};

// Binary spikes indexed [timestep][neuron].
class SpikeTrain {
 public:
  SpikeTrain() = default;
  SpikeTrain(std::size_t timesteps, std::size_t width)
      : bits_(timesteps, width, 0) {}

  std::size_t timesteps() const { return bits_.rows(); }
  std::size_t width() const { return bits_.cols(); }

  bool at(std::size_t t, std::size_t i) const { return bits_(t, i) != 0; }
  void set(std::size_t t, std::size_t i, bool spike) { bits_(t, i) = spike ? 1 : 0; }
  std::span<const std::uint8_t> step(std::size_t t) const { return bits_.row(t); }
  std::span<std::uint8_t> step(std::size_t t) { return bits_.row(t); }

  std::size_t count() const;
  void validate() const;  // T >= 1, N >= 1, all entries 0/1

  friend bool operator==(const SpikeTrain&, const SpikeTrain&) = default;

 private:
  BinaryMatrix bits_;
};

struct LayerState {
  std::vector<double> h;
};

// Per-output-neuron normalization folded into the linear map:
//   x' = scale_i * x + bias_i,  scale_i = gamma_i / sqrt(sigma_b_i^2 + eps_bn),
//   bias_i = shift_i - mu_b_i * scale_i.
// sigma_b / mu_b are stored running statistics.
struct NormParams {
  std::vector<double> gamma;
  std::vector<double> sigma_b;
  std::vector<double> mu_b;
  std::vector<double> shift;
  double eps_bn = 1e-5;

  static NormParams unit(std::size_t n);

  std::size_t size() const { return gamma.size(); }
  double scale(std::size_t i) const;
  double bias(std::size_t i) const { return shift[i] - mu_b[i] * scale(i); }
  void validate() const;

  friend bool operator==(const NormParams&, const NormParams&) = default;
};

struct MaskedDenseLayer {
  Matrix weights;      // N_out x N_in
  BinaryMatrix mask;   // same shape, 1 = connection kept
  std::optional<NormParams> norm;

  MaskedDenseLayer() = default;
  // All-ones mask.
  explicit MaskedDenseLayer(Matrix w);

  std::size_t in_dim() const { return weights.cols(); }
  std::size_t out_dim() const { return weights.rows(); }
  double effective_weight(std::size_t i, std::size_t j) const {
    return mask(i, j) ? weights(i, j) : 0.0;
  }
  std::size_t active_count() const;
  void validate() const;

  // x = norm(W (.) M * s). `s` may be binary or real-valued.
  void spatial_input(std::span<const std::uint8_t> s, std::span<double> x) const;
  void spatial_input(std::span<const double> s, std::span<double> x) const;

  friend bool operator==(const MaskedDenseLayer&, const MaskedDenseLayer&) = default;
};

struct SpikingNetwork {
  std::vector<MaskedDenseLayer> layers;
  std::vector<LifParams> params;   // one per layer
  std::vector<LayerState> states;  // one per layer, mutated by forward passes

  void add_layer(MaskedDenseLayer layer, const LifParams& p);
  std::size_t depth() const { return layers.size(); }
  std::size_t input_width() const;
  std::size_t output_width() const;
  void reset_state();  // h^0 = 0 everywhere
  void validate() const;
  std::size_t total_weights() const;
  std::size_t active_weights() const;
};

struct LifStep {
  bool spike;
  double h_next;
};

LifStep lif_step(double h_prev, double x, const LifParams& params);

// One timestep of one layer; `state` is updated in place.
std::vector<std::uint8_t> layer_forward(const MaskedDenseLayer& layer,
                                        const LifParams& params,
                                        std::span<const std::uint8_t> s_in,
                                        LayerState& state);

// Resets every layer state to zero and runs all timesteps. Returns the spikes
// of the last layer.
SpikeTrain network_forward(SpikingNetwork& net, const SpikeTrain& input);

// Spikes of every layer (index 0 = first hidden layer) for one input.
std::vector<SpikeTrain> network_forward_all(SpikingNetwork& net,
                                            const SpikeTrain& input);

// How the spike nonlinearity is evaluated when recording a trace.
//  kHeaviside: s = Hea(u - u_th) (the real network).
//  kRamp:      s = clamp((u - u_th)/width + 1/2, 0, 1), whose derivative is the
//              rectangular surrogate; the reset gate stays Heaviside. Used to
//              check surrogate gradients against finite differences.
enum class Activation { kHeaviside, kRamp };

// Values recorded by a forward pass; [layer][t] -> vector.
struct ForwardTrace {
  std::vector<std::vector<std::vector<double>>> inputs;  // s^{t, l-1}
  std::vector<std::vector<std::vector<double>>> x;       // normalized spatial input
  std::vector<std::vector<std::vector<double>>> u;       // membrane potential
  std::vector<std::vector<std::vector<double>>> spikes;  // s^{t, l}
  std::size_t timesteps = 0;

  // Per-neuron firing rate of the last layer.
  std::vector<double> output_rates() const;
};

ForwardTrace record_forward(const SpikingNetwork& net, const SpikeTrain& input,
                            Activation act = Activation::kHeaviside,
                            double ramp_width = 1.0);

}  // namespace snnlth
