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

// Probabilistic model of spike flips under bounded membrane perturbations.
//
// A perturbation |u' - u| <= eps can change Hea(u - u_th) only when u lies in
// the crisis neighborhood [u_th - eps, u_th + eps]. Its probability mass
// bounds the flip probability of one neuron; input errors accumulate over
// time at most geometrically in beta, and a union bound covers a layer.

#include <cstddef>
#include <span>
#include <vector>

#include "snnlth/core.hpp"
#include "snnlth/encode.hpp"

namespace snnlth {

// Histogram bin width (membrane units) used when the variance is degenerate.
inline constexpr double kDegenerateBinWidth = 1e-2;
inline constexpr double kDegenerateVariance = 1e-8;

struct NeuronStats {
  double mu = 0.0;
  double var = 0.0;        // population variance
  double p_sup = 0.0;      // density supremum estimate
  bool degenerate = false; // var below kDegenerateVariance
  std::size_t count = 0;
};

struct MembraneStats {
  std::vector<NeuronStats> neurons;  // per output neuron
  std::vector<double> input_rate;    // per input channel firing rate
  Matrix e_act_absw;                 // [out][in] = input_rate[in] * |w_eff(out, in)|
};

// Mean / population variance / p_sup of a set of membrane potentials.
NeuronStats summarize_potentials(std::span<const double> potentials);

// Stats for every layer over every sample and timestep of `data`.
std::vector<MembraneStats> estimate_membrane_stats(const SpikingNetwork& net,
                                                   const LabeledSpikeDataset& data);

struct CrisisQuery {
  double eps = 0.1;
  double u_th = 0.5;
  double beta = 0.5;
  std::size_t width = 1;
  std::size_t timesteps = 1;
  void validate() const;
};

double gaussian_pdf(double x, double mean, double var);
double gaussian_cdf(double x, double mean, double var);

// Gaussian mass of [u_th - eps, u_th + eps]. A degenerate (var = 0) neuron is a
// point mass: 1 if |mu - u_th| <= eps else 0.
double crisis_probability(const NeuronStats& stats, const CrisisQuery& q);

// eps * (1 - beta^T) / (1 - beta): worst-case membrane error after T steps of
// per-step input error eps with matching spike histories.
double temporal_error_bound(double eps, double beta, std::size_t timesteps);

// min(1, 2 N p_sup eps / (1 - beta)).
double layer_flip_bound(double p_sup, const CrisisQuery& q);

struct NormScale {
  double gamma = 1.0;
  double sigma_b = 1.0;
  double eps_bn = 1e-5;
  double value() const;  // |gamma| / sqrt(sigma_b^2 + eps_bn)
};

// Density of the membrane potential at u_th; point-mass neurons use the
// degenerate-bin estimate.
double density_at_threshold(const NeuronStats& stats, double u_th);

// P = e_act_absw * |gamma| / sqrt(sigma_b^2 + eps_bn) * N(0 | mu - u_th, var).
double weight_flip_probability(double e_act_absw, const NormScale& norm,
                               const NeuronStats& stats, double u_th);

struct FlipReportRow {
  std::size_t layer = 0;
  std::size_t out_idx = 0;
  std::size_t in_idx = 0;
  double abs_w = 0.0;
  double e_act_absw = 0.0;
  double gamma_scale = 0.0;
  double mu = 0.0;
  double var = 0.0;
  double p = 0.0;
};

// One row per unmasked weight. Layers without normalization use scale 1.
std::vector<FlipReportRow> flip_report(const SpikingNetwork& net,
                                       const std::vector<MembraneStats>& stats);

}  // namespace snnlth
