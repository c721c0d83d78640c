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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "snnlth/core.hpp"
#include "snnlth/errors.hpp"
#include "snnlth/rng.hpp"

using namespace snnlth;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (auto& v : m.flat()) v = uniform(rng, lo, hi);
  return m;
}

// Scalar LIF written out independently of the library.
struct ScalarNeuron {
  double h = 0.0;
  int step(double x, double beta, double u_th, double v_reset) {
    const double u = h + x;
    const int s = (u - u_th >= 0.0) ? 1 : 0;
    h = s ? v_reset : beta * u;
    return s;
  }
};

std::vector<std::vector<int>> scalar_simulation(const std::vector<Matrix>& weights,
                                                const std::vector<BinaryMatrix>& masks,
                                                const std::vector<std::vector<int>>& input,
                                                double beta, double u_th, double v_reset) {
  std::vector<std::vector<ScalarNeuron>> neurons;
  for (const auto& w : weights) neurons.emplace_back(w.rows());
  std::vector<std::vector<int>> out;
  for (const auto& s0 : input) {
    std::vector<int> s = s0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      std::vector<int> next(weights[l].rows());
      for (std::size_t i = 0; i < weights[l].rows(); ++i) {
        double x = 0.0;
        for (std::size_t j = 0; j < weights[l].cols(); ++j) {
          if (masks[l](i, j) && s[j]) x += weights[l](i, j);
        }
        next[i] = neurons[l][i].step(x, beta, u_th, v_reset);
      }
      s = next;
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("lif_step examples") {
  LifParams p{0.9, 0.5, 0.0};
  auto a = lif_step(0.3, 0.4, p);
  CHECK(a.spike);
  CHECK(a.h_next == 0.0);

  auto b = lif_step(0.2, 0.1, p);
  CHECK_FALSE(b.spike);
  CHECK(b.h_next == doctest::Approx(0.27).epsilon(1e-15));

  auto c = lif_step(0.0, 0.5, LifParams{0.5, 0.5, 0.0});
  CHECK(c.spike);
}

TEST_CASE("lif_step h_next is exactly v_reset or beta*u") {
  Rng rng(3);
  LifParams p{0.7, 0.4, -0.2};
  for (int n = 0; n < 1000; ++n) {
    const double h = uniform(rng, -1, 1), x = uniform(rng, -1, 1);
    const auto r = lif_step(h, x, p);
    const double u = h + x;
    CHECK(r.spike == (u >= p.u_th));
    CHECK(r.h_next == (r.spike ? p.v_reset : p.beta * u));
  }
}

TEST_CASE("lif_step rejects non-finite input") {
  LifParams p;
  CHECK_THROWS_AS(lif_step(std::nan(""), 0.0, p), DomainError);
  CHECK_THROWS_AS(lif_step(0.0, std::numeric_limits<double>::infinity(), p), DomainError);
}

TEST_CASE("LifParams invariants") {
  CHECK_THROWS_AS((LifParams{1.0, 0.5, 0.0}.validate()), DomainError);
  CHECK_THROWS_AS((LifParams{0.0, 0.5, 0.0}.validate()), DomainError);
  CHECK_THROWS_AS((LifParams{0.5, 0.5, 0.5}.validate()), DomainError);
  CHECK_NOTHROW((LifParams{0.5, 0.5, 0.0}.validate()));
}

TEST_CASE("layer_forward: zero input gives no spikes") {
  Rng rng(1);
  MaskedDenseLayer layer(random_matrix(5, 3, rng));
  LayerState st{std::vector<double>(5, 0.0)};
  std::vector<std::uint8_t> s(3, 0);
  const auto out = layer_forward(layer, LifParams{}, s, st);
  for (auto v : out) CHECK(v == 0);
  for (auto h : st.h) CHECK(h == 0.0);
}

TEST_CASE("layer_forward: mask kills weight") {
  Matrix w(1, 1, 1.0);
  MaskedDenseLayer layer(w);
  layer.mask(0, 0) = 0;
  LayerState st{{0.0}};
  std::vector<std::uint8_t> s{1};
  const auto out = layer_forward(layer, LifParams{}, s, st);
  CHECK(out[0] == 0);
  CHECK(st.h[0] == 0.0);
}

TEST_CASE("layer_forward matches a per-neuron recomputation") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    MaskedDenseLayer layer(random_matrix(3, 3, rng));
    for (auto& m : layer.mask.flat()) m = bernoulli(rng, 0.7);
    const bool with_norm = trial % 2 == 1;
    if (with_norm) {
      NormParams n = NormParams::unit(3);
      for (std::size_t i = 0; i < 3; ++i) {
        n.gamma[i] = uniform(rng, 0.5, 2.0);
        n.sigma_b[i] = uniform(rng, 0.1, 1.0);
        n.mu_b[i] = uniform(rng, -0.5, 0.5);
        n.shift[i] = uniform(rng, -0.2, 0.2);
      }
      layer.norm = n;
    }
    LifParams p{0.6, 0.3, 0.0};
    LayerState st{{uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5)}};
    const auto h0 = st.h;
    std::vector<std::uint8_t> s{1, 0, 1};
    const auto out = layer_forward(layer, p, s, st);
    for (std::size_t i = 0; i < 3; ++i) {
      double x = 0.0;
      if (layer.mask(i, 0)) x += layer.weights(i, 0);
      if (layer.mask(i, 2)) x += layer.weights(i, 2);
      if (with_norm) {
        const auto& n = *layer.norm;
        x = n.gamma[i] * (x - n.mu_b[i]) / std::sqrt(n.sigma_b[i] * n.sigma_b[i] + n.eps_bn) + n.shift[i];
      }
      const double u = h0[i] + x;
      const bool fire = u >= p.u_th;
      CHECK(static_cast<bool>(out[i]) == fire);
      CHECK(st.h[i] == doctest::Approx(fire ? 0.0 : p.beta * u).epsilon(1e-12));
    }
  }
}

TEST_CASE("layer_forward rejects dimension mismatch") {
  MaskedDenseLayer layer(Matrix(2, 3, 0.1));
  LayerState st{{0.0, 0.0}};
  std::vector<std::uint8_t> s(2, 1);
  CHECK_THROWS_AS(layer_forward(layer, LifParams{}, s, st), DomainError);
  LayerState bad{{0.0}};
  std::vector<std::uint8_t> ok(3, 1);
  CHECK_THROWS_AS(layer_forward(layer, LifParams{}, ok, bad), DomainError);
}

TEST_CASE("network_forward: one layer, T=1 equals layer_forward") {
  Rng rng(5);
  MaskedDenseLayer layer(random_matrix(4, 3, rng));
  SpikingNetwork net;
  net.add_layer(layer, LifParams{});
  SpikeTrain in(1, 3);
  in.set(0, 0, true);
  in.set(0, 2, true);
  const auto out = network_forward(net, in);
  LayerState st{std::vector<double>(4, 0.0)};
  const auto ref = layer_forward(layer, LifParams{}, in.step(0), st);
  for (std::size_t i = 0; i < 4; ++i) CHECK(out.at(0, i) == static_cast<bool>(ref[i]));
}

TEST_CASE("network_forward is deterministic and resets state") {
  Rng rng(6);
  SpikingNetwork net;
  net.add_layer(MaskedDenseLayer(random_matrix(4, 4, rng, 0, 1)), LifParams{});
  net.add_layer(MaskedDenseLayer(random_matrix(2, 4, rng, 0, 1)), LifParams{});
  SpikeTrain in(5, 4);
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t i = 0; i < 4; ++i) in.set(t, i, bernoulli(rng, 0.5));
  SpikingNetwork twin = net;
  const auto a = network_forward(net, in);
  const auto b = network_forward(net, in);
  const auto c = network_forward(twin, in);
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("network_forward matches a scalar-loop simulation") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Matrix> ws{random_matrix(4, 4, rng), random_matrix(4, 4, rng)};
    std::vector<BinaryMatrix> ms;
    SpikingNetwork net;
    const double beta = uniform(rng, 0.1, 0.9), u_th = uniform(rng, 0.1, 0.8);
    for (auto& w : ws) {
      MaskedDenseLayer layer(w);
      for (auto& m : layer.mask.flat()) m = bernoulli(rng, 0.8);
      ms.push_back(layer.mask);
      net.add_layer(layer, LifParams{beta, u_th, 0.0});
    }
    std::vector<std::vector<int>> input(3, std::vector<int>(4));
    SpikeTrain in(3, 4);
    for (std::size_t t = 0; t < 3; ++t)
      for (std::size_t i = 0; i < 4; ++i) {
        input[t][i] = bernoulli(rng, 0.5);
        in.set(t, i, input[t][i]);
      }
    const auto ref = scalar_simulation(ws, ms, input, beta, u_th, 0.0);
    const auto out = network_forward(net, in);
    for (std::size_t t = 0; t < 3; ++t)
      for (std::size_t i = 0; i < 4; ++i) REQUIRE(out.at(t, i) == (ref[t][i] == 1));
  }
}

TEST_CASE("network_forward rejects width mismatch") {
  SpikingNetwork net;
  net.add_layer(MaskedDenseLayer(Matrix(2, 3, 0.1)), LifParams{});
  CHECK_THROWS_AS(network_forward(net, SpikeTrain(2, 4)), DomainError);
}

TEST_CASE("add_layer rejects incompatible widths") {
  SpikingNetwork net;
  net.add_layer(MaskedDenseLayer(Matrix(2, 3, 0.1)), LifParams{});
  CHECK_THROWS_AS(net.add_layer(MaskedDenseLayer(Matrix(2, 3, 0.1)), LifParams{}), DomainError);
}

TEST_CASE("zero input forever gives zero spikes forever") {
  Rng rng(8);
  SpikingNetwork net;
  net.add_layer(MaskedDenseLayer(random_matrix(6, 5, rng)), LifParams{});
  net.add_layer(MaskedDenseLayer(random_matrix(3, 6, rng)), LifParams{});
  const auto all = network_forward_all(net, SpikeTrain(100, 5));
  for (const auto& s : all) CHECK(s.count() == 0);
}

TEST_CASE("membrane error recursion stays under the geometric sum") {
  // Two copies of a neuron, per-step input error <= eps, same spike history.
  Rng rng(9);
  for (int trial = 0; trial < 2000; ++trial) {
    const double beta = uniform(rng, 0.1, 0.95), eps = 0.05;
    LifParams p{beta, 0.5, 0.0};
    double ha = 0.0, hb = 0.0;
    const std::size_t T = 8;
    for (std::size_t t = 0; t < T; ++t) {
      const double x = uniform(rng, -0.3, 0.3);
      const double e = uniform(rng, -eps, eps);
      const auto a = lif_step(ha, x, p);
      const auto b = lif_step(hb, x + e, p);
      if (a.spike != b.spike) break;
      const double err = std::abs((ha + x) - (hb + x + e));
      double bound = 0.0;
      for (std::size_t n = 0; n <= t; ++n) bound += std::pow(beta, n) * eps;
      CHECK(err <= bound + 1e-12);
      CHECK(err <= eps / (1 - beta) + 1e-12);
      ha = a.h_next;
      hb = b.h_next;
    }
  }
}

TEST_CASE("record_forward heaviside agrees with network_forward") {
  Rng rng(10);
  SpikingNetwork net;
  net.add_layer(MaskedDenseLayer(random_matrix(4, 4, rng)), LifParams{});
  net.add_layer(MaskedDenseLayer(random_matrix(2, 4, rng)), LifParams{});
  SpikeTrain in(4, 4);
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t i = 0; i < 4; ++i) in.set(t, i, bernoulli(rng, 0.5));
  const auto trace = record_forward(net, in);
  const auto out = network_forward(net, in);
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t i = 0; i < 2; ++i) CHECK(trace.spikes[1][t][i] == (out.at(t, i) ? 1.0 : 0.0));
}

TEST_CASE("SpikeTrain validation") {
  CHECK_THROWS_AS(SpikeTrain(0, 3).validate(), DomainError);
  CHECK_THROWS_AS(SpikeTrain(3, 0).validate(), DomainError);
  SpikeTrain s(2, 2);
  s.step(0)[1] = 2;
  CHECK_THROWS_AS(s.validate(), DomainError);
}

TEST_CASE("NormParams invariants") {
  auto n = NormParams::unit(2);
  n.sigma_b[0] = -1.0;
  CHECK_THROWS_AS(n.validate(), DomainError);
  n = NormParams::unit(2);
  n.eps_bn = 0.0;
  CHECK_THROWS_AS(n.validate(), DomainError);
}
