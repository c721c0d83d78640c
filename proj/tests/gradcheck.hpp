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

// Central finite differences of the ramp-relaxed loss against the surrogate
// gradient. Shared by the train unit tests and the acceptance binary.

#include <cmath>
#include <cstdint>

#include "snnlth/rng.hpp"
#include "snnlth/train.hpp"

namespace snnlth::testing {

struct GradCheckResult {
  std::size_t checked = 0;
  std::size_t nonzero = 0;
  std::size_t failures = 0;
  double max_rel_error = 0.0;
};

// 2-layer, N=4, T=3 networks; `samples` weights drawn over fresh nets.
inline GradCheckResult run_gradient_check(std::size_t samples, std::uint64_t seed,
                                          double rel_tol = 1e-3) {
  GradCheckResult r;
  Rng rng(seed);
  const SurrogateSpec spec{1.0};
  const double h = 1e-6;
  while (r.checked < samples) {
    SpikingNetwork net;
    for (int l = 0; l < 2; ++l) {
      Matrix w(4, 4);
      for (auto& v : w.flat()) v = uniform(rng, -1.0, 1.0);
      net.add_layer(MaskedDenseLayer(w), LifParams{uniform(rng, 0.2, 0.9), 0.5, 0.0});
    }
    std::vector<LabeledSample> batch(2);
    for (std::size_t b = 0; b < batch.size(); ++b) {
      batch[b].spikes = SpikeTrain(3, 4);
      for (std::size_t t = 0; t < 3; ++t)
        for (std::size_t i = 0; i < 4; ++i) batch[b].spikes.set(t, i, bernoulli(rng, 0.6));
      batch[b].label = b % 4;
    }
    const auto g = compute_gradients(net, batch, spec, Activation::kRamp);
    for (int pick = 0; pick < 4 && r.checked < samples; ++pick) {
      const std::size_t l = rng() % 2, k = rng() % 16;
      auto plus = net, minus = net;
      plus.layers[l].weights.flat()[k] += h;
      minus.layers[l].weights.flat()[k] -= h;
      const double fd = (batch_loss(plus, batch, spec, Activation::kRamp) -
                         batch_loss(minus, batch, spec, Activation::kRamp)) /
                        (2 * h);
      const double an = g.weights[l].flat()[k];
      const double scale = std::max(std::abs(an), std::abs(fd));
      const double rel = scale == 0.0 ? 0.0 : std::abs(an - fd) / scale;
      ++r.checked;
      r.nonzero += scale > 0.0;
      r.max_rel_error = std::max(r.max_rel_error, rel);
      r.failures += rel > rel_tol;
    }
  }
  return r;
}

}  // namespace snnlth::testing
