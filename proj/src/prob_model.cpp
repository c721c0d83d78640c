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

#include "snnlth/prob_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "snnlth/errors.hpp"

namespace snnlth {

namespace {

struct Welford {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  NeuronStats finish() const {
    NeuronStats s;
    s.count = n;
    if (n == 0) return s;
    s.mu = mean;
    s.var = std::max(0.0, m2 / static_cast<double>(n));
    s.degenerate = s.var < kDegenerateVariance;
    // A near-constant potential puts all its mass into one histogram bin.
    s.p_sup = s.degenerate ? 1.0 / kDegenerateBinWidth
                           : 1.0 / std::sqrt(2.0 * std::numbers::pi * s.var);
    return s;
  }
};

}  // namespace

NeuronStats summarize_potentials(std::span<const double> potentials) {
  Welford w;
  for (double u : potentials) w.add(u);
  return w.finish();
}

std::vector<MembraneStats> estimate_membrane_stats(const SpikingNetwork& net,
                                                   const LabeledSpikeDataset& data) {
  if (data.empty()) throw DomainError("estimate_membrane_stats: empty dataset");
  if (data.width != net.input_width()) {
    throw DomainError("estimate_membrane_stats: dataset width does not match network input");
  }
  const std::size_t L = net.depth();
  std::vector<std::vector<Welford>> acc(L);
  std::vector<std::vector<double>> fired(L);
  std::vector<std::size_t> steps(L, 0);
  for (std::size_t l = 0; l < L; ++l) {
    acc[l].resize(net.layers[l].out_dim());
    fired[l].assign(net.layers[l].in_dim(), 0.0);
  }
  for (const auto& sample : data.samples) {
    const auto tr = record_forward(net, sample.spikes);
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t t = 0; t < tr.timesteps; ++t) {
        const auto& u = tr.u[l][t];
        for (std::size_t i = 0; i < u.size(); ++i) acc[l][i].add(u[i]);
        const auto& s = tr.inputs[l][t];
        for (std::size_t j = 0; j < s.size(); ++j) fired[l][j] += s[j];
        ++steps[l];
      }
    }
  }
  std::vector<MembraneStats> out(L);
  for (std::size_t l = 0; l < L; ++l) {
    const auto& layer = net.layers[l];
    auto& st = out[l];
    for (const auto& w : acc[l]) st.neurons.push_back(w.finish());
    st.input_rate.resize(layer.in_dim());
    for (std::size_t j = 0; j < layer.in_dim(); ++j) {
      st.input_rate[j] = fired[l][j] / static_cast<double>(steps[l]);
    }
    st.e_act_absw = Matrix(layer.out_dim(), layer.in_dim());
    for (std::size_t i = 0; i < layer.out_dim(); ++i) {
      for (std::size_t j = 0; j < layer.in_dim(); ++j) {
        st.e_act_absw(i, j) = st.input_rate[j] * std::abs(layer.effective_weight(i, j));
      }
    }
  }
  return out;
}

void CrisisQuery::validate() const {
  if (!(eps >= 0.0)) throw DomainError("CrisisQuery: eps must be >= 0");
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("CrisisQuery: beta must lie in (0, 1)");
}

double gaussian_pdf(double x, double mean, double var) {
  const double z = x - mean;
  return std::exp(-0.5 * z * z / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

double gaussian_cdf(double x, double mean, double var) {
  return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * var));
}

double crisis_probability(const NeuronStats& stats, const CrisisQuery& q) {
  q.validate();
  if (stats.var == 0.0) return std::abs(stats.mu - q.u_th) <= q.eps ? 1.0 : 0.0;
  if (q.eps == 0.0) return 0.0;
  const double p = gaussian_cdf(q.u_th + q.eps, stats.mu, stats.var) -
                   gaussian_cdf(q.u_th - q.eps, stats.mu, stats.var);
  return std::clamp(p, 0.0, 1.0);
}

double temporal_error_bound(double eps, double beta, std::size_t timesteps) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("temporal_error_bound: beta must lie in (0, 1)");
  if (!(eps >= 0.0)) throw DomainError("temporal_error_bound: eps must be >= 0");
  const double bound = eps * (1.0 - std::pow(beta, static_cast<double>(timesteps))) / (1.0 - beta);
  return std::min(bound, eps / (1.0 - beta));
}

double layer_flip_bound(double p_sup, const CrisisQuery& q) {
  q.validate();
  if (!(p_sup >= 0.0)) throw DomainError("layer_flip_bound: p_sup must be >= 0");
  const double b = 2.0 * static_cast<double>(q.width) * p_sup * q.eps / (1.0 - q.beta);
  return std::min(1.0, b);
}

double NormScale::value() const { return std::abs(gamma) / std::sqrt(sigma_b * sigma_b + eps_bn); }

double density_at_threshold(const NeuronStats& stats, double u_th) {
  if (stats.var < kDegenerateVariance) {
    return std::abs(stats.mu - u_th) <= kDegenerateBinWidth / 2 ? 1.0 / kDegenerateBinWidth : 0.0;
  }
  return gaussian_pdf(0.0, stats.mu - u_th, stats.var);
}

double weight_flip_probability(double e_act_absw, const NormScale& norm,
                               const NeuronStats& stats, double u_th) {
  return e_act_absw * norm.value() * density_at_threshold(stats, u_th);
}

std::vector<FlipReportRow> flip_report(const SpikingNetwork& net,
                                       const std::vector<MembraneStats>& stats) {
  if (stats.size() != net.depth()) throw DomainError("flip_report: one MembraneStats per layer required");
  std::vector<FlipReportRow> rows;
  for (std::size_t l = 0; l < net.depth(); ++l) {
    const auto& layer = net.layers[l];
    const double u_th = net.params[l].u_th;
    for (std::size_t i = 0; i < layer.out_dim(); ++i) {
      NormScale ns;
      if (layer.norm) {
        ns = {layer.norm->gamma[i], layer.norm->sigma_b[i], layer.norm->eps_bn};
      } else {
        ns = {1.0, std::sqrt(1.0 - ns.eps_bn), ns.eps_bn};
      }
      const auto& n = stats[l].neurons[i];
      for (std::size_t j = 0; j < layer.in_dim(); ++j) {
        if (!layer.mask(i, j)) continue;
        FlipReportRow r;
        r.layer = l;
        r.out_idx = i;
        r.in_idx = j;
        r.abs_w = std::abs(layer.weights(i, j));
        r.e_act_absw = stats[l].e_act_absw(i, j);
        r.gamma_scale = ns.value();
        r.mu = n.mu;
        r.var = n.var;
        r.p = weight_flip_probability(r.e_act_absw, ns, n, u_th);
        rows.push_back(r);
      }
    }
  }
  return rows;
}

}  // namespace snnlth
