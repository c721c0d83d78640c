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

#include "snnlth/errors.hpp"
#include "snnlth/rng.hpp"
#include "snnlth/train.hpp"
#include "gradcheck.hpp"

using namespace snnlth;

TEST_CASE("surrogate_grad examples") {
  LifParams p{0.5, 0.5, 0.0};
  SurrogateSpec s{1.0};
  CHECK(surrogate_grad(0.5, p, s) == 1.0);
  CHECK(surrogate_grad(10.5, p, s) == 0.0);
  CHECK(surrogate_grad(0.5 + 0.49, p, s) == 1.0);
  CHECK(surrogate_grad(0.5 + 0.51, p, s) == 0.0);
}

TEST_CASE("surrogate integrates to one for any width") {
  LifParams p{0.5, 0.3, 0.0};
  for (double a : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    SurrogateSpec s{a};
    // Trapezoid rule on a fine grid over [u_th - a, u_th + a].
    const int n = 200000;
    const double lo = p.u_th - a, hi = p.u_th + a, h = (hi - lo) / n;
    double sum = 0.5 * (surrogate_grad(lo, p, s) + surrogate_grad(hi, p, s));
    for (int k = 1; k < n; ++k) sum += surrogate_grad(lo + k * h, p, s);
    CHECK(sum * h == doctest::Approx(1.0).epsilon(1e-4));
  }
  CHECK_THROWS_AS(SurrogateSpec{0.0}.validate(), DomainError);
}

TEST_CASE("rate_loss examples") {
  SpikeTrain out(4, 2);
  for (std::size_t t = 0; t < 4; ++t) out.set(t, 0, true);
  CHECK(rate_loss(out, 0) < rate_loss(out, 1));

  SpikeTrain uniform(4, 2);
  uniform.set(0, 0, true);
  uniform.set(1, 1, true);
  CHECK(rate_loss(uniform, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(rate_loss(out, 2), DomainError);
}

TEST_CASE("rate_loss matches a scalar softmax cross-entropy") {
  Rng rng(4);
  for (int n = 0; n < 500; ++n) {
    const std::size_t C = 2 + n % 5, T = 1 + n % 7;
    SpikeTrain out(T, C);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t c = 0; c < C; ++c) out.set(t, c, bernoulli(rng, 0.4));
    const std::size_t label = n % C;
    double denom = 0.0, z_label = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      double cnt = 0;
      for (std::size_t t = 0; t < T; ++t) cnt += out.at(t, c);
      const double z = cnt / T;
      denom += std::exp(z);
      if (c == label) z_label = z;
    }
    const double ref = -std::log(std::exp(z_label) / denom);
    CHECK(std::abs(rate_loss(out, label) - ref) <= 1e-10);
    CHECK(rate_loss(out, label) >= 0.0);
  }
}

TEST_CASE("predict breaks ties toward the lowest index") {
  SpikeTrain out(2, 3);
  out.set(0, 1, true);
  out.set(0, 2, true);
  CHECK(predict(out) == 1);
  CHECK(predict(SpikeTrain(2, 3)) == 0);
}

namespace {

LabeledSpikeDataset small_task(std::uint64_t seed, std::size_t per_class = 50) {
  return synthetic_patterns(SyntheticSpec{2, 16, 4, 0.05, per_class, seed});
}

SpikingNetwork small_net(std::uint64_t seed) {
  NetworkShape shape;
  shape.widths = {16, 32, 2};
  return make_network(shape, seed);
}

}  // namespace

TEST_CASE("bptt_step with zero learning rate leaves weights unchanged") {
  auto data = small_task(1);
  auto net = small_net(2);
  const auto before = net.layers;
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  bptt_step(net, std::span(data.samples).subspan(0, 16), cfg, SurrogateSpec{});
  CHECK(net.layers == before);
}

TEST_CASE("masked weights never move") {
  auto data = small_task(1);
  auto net = small_net(2);
  for (auto& m : net.layers[0].mask.flat()) m = 0;
  Rng rng(5);
  for (auto& m : net.layers[1].mask.flat()) m = bernoulli(rng, 0.5);
  const auto w0 = net.layers[0].weights;
  const auto w1 = net.layers[1].weights;
  const auto m1 = net.layers[1].mask;
  TrainConfig cfg;
  cfg.epochs = 5;
  Trainer trainer(cfg, SurrogateSpec{});
  trainer.train(net, data, 0, 5);
  CHECK(net.layers[0].weights == w0);
  for (std::size_t i = 0; i < w1.size(); ++i) {
    if (!m1.flat()[i]) CHECK(net.layers[1].weights.flat()[i] == w1.flat()[i]);
  }
}

TEST_CASE("bptt_step rejects an empty batch") {
  auto net = small_net(2);
  std::vector<LabeledSample> none;
  CHECK_THROWS_AS(bptt_step(net, none, TrainConfig{}, SurrogateSpec{}), DomainError);
}

TEST_CASE("bptt_step moves weights by -lr times the batch gradient") {
  auto data = small_task(3);
  auto net = small_net(4);
  const auto batch = std::span(data.samples).subspan(0, 8);
  const auto g = compute_gradients(net, batch, SurrogateSpec{});
  auto stepped = net;
  TrainConfig cfg;
  cfg.learning_rate = 0.25;
  bptt_step(stepped, batch, cfg, SurrogateSpec{});
  for (std::size_t l = 0; l < net.depth(); ++l)
    for (std::size_t i = 0; i < g.weights[l].size(); ++i)
      CHECK(stepped.layers[l].weights.flat()[i] ==
            doctest::Approx(net.layers[l].weights.flat()[i] - 0.25 * g.weights[l].flat()[i]).epsilon(1e-14));
}

TEST_CASE("gradients match finite differences of the relaxed loss") {
  const auto r = testing::run_gradient_check(100, 2024);
  INFO("max relative error " << r.max_rel_error);
  CHECK(r.checked >= 100);
  CHECK(r.failures == 0);
  CHECK(r.nonzero >= 50);
}

TEST_CASE("training is reproducible and split epochs agree") {
  auto data = small_task(6);
  TrainConfig cfg;
  cfg.seed = 9;
  auto a = small_net(7), b = small_net(7), c = small_net(7);
  Trainer ta(cfg, SurrogateSpec{}), tb(cfg, SurrogateSpec{}), tc(cfg, SurrogateSpec{});
  ta.train(a, data, 0, 6);
  tb.train(b, data, 0, 6);
  tc.train(c, data, 0, 2);
  tc.train(c, data, 2, 4);
  CHECK(a.layers == b.layers);
  CHECK(a.layers == c.layers);
}

TEST_CASE("epoch_order is a permutation depending on seed and epoch") {
  const auto a = epoch_order(50, 1, 0);
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 50; ++i) CHECK(sorted[i] == i);
  CHECK(a == epoch_order(50, 1, 0));
  CHECK(a != epoch_order(50, 1, 1));
  CHECK(a != epoch_order(50, 2, 0));
}

TEST_CASE("training reaches 95% on separable synthetic patterns") {
  auto data = small_task(10, 100);
  auto net = small_net(11);
  TrainConfig cfg;
  cfg.seed = 12;
  Trainer trainer(cfg, SurrogateSpec{});
  double best = 0.0;
  for (std::size_t e = 0; e < 200 && best < 0.95; ++e) best = trainer.train_epoch(net, data, e).train_acc;
  CHECK(accuracy(net, data) >= 0.95);
}

TEST_CASE("momentum zero equals plain SGD") {
  auto data = small_task(13);
  TrainConfig cfg;
  cfg.seed = 1;
  auto a = small_net(14), b = small_net(14);
  Trainer ta(cfg, SurrogateSpec{});
  ta.train(a, data, 0, 1);
  // Manual loop over the same batches.
  const auto order = epoch_order(data.size(), cfg.seed, 0);
  for (std::size_t s = 0; s < order.size(); s += cfg.batch_size) {
    std::vector<LabeledSample> batch;
    for (std::size_t k = s; k < std::min(order.size(), s + cfg.batch_size); ++k)
      batch.push_back(data.samples[order[k]]);
    bptt_step(b, batch, cfg, SurrogateSpec{});
  }
  CHECK(a.layers == b.layers);
}

TEST_CASE("make_network and calibrate_norm") {
  NetworkShape shape;
  shape.widths = {8, 6, 3};
  shape.hidden_norm = true;
  auto net = make_network(shape, 1);
  REQUIRE(net.depth() == 2);
  CHECK(net.layers[0].norm.has_value());
  CHECK_FALSE(net.layers[1].norm.has_value());
  const double b = std::sqrt(3.0 / 8.0);
  for (double w : net.layers[0].weights.flat()) CHECK(std::abs(w) <= b);
  auto data = synthetic_patterns(SyntheticSpec{3, 8, 3, 0.1, 20, 2});
  calibrate_norm(net, data);
  // Raw input statistics of layer 0 recomputed directly.
  for (std::size_t i = 0; i < 6; ++i) {
    double sum = 0, sq = 0;
    std::size_t n = 0;
    for (const auto& s : data.samples)
      for (std::size_t t = 0; t < 3; ++t) {
        double x = 0;
        for (std::size_t j = 0; j < 8; ++j) x += s.spikes.at(t, j) ? net.layers[0].weights(i, j) : 0.0;
        sum += x;
        sq += x * x;
        ++n;
      }
    const double mu = sum / n;
    CHECK(net.layers[0].norm->mu_b[i] == doctest::Approx(mu).epsilon(1e-12));
    CHECK(net.layers[0].norm->sigma_b[i] == doctest::Approx(std::sqrt(std::max(0.0, sq / n - mu * mu))).epsilon(1e-9));
  }
}
