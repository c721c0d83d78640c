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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "snnlth/core.hpp"

namespace snnlth {

struct LabeledSample {
  SpikeTrain spikes;
  std::size_t label = 0;
};

struct LabeledSpikeDataset {
  std::vector<LabeledSample> samples;
  std::size_t n_classes = 0;
  std::size_t width = 0;
  std::size_t timesteps = 0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  void validate() const;
};

// Bernoulli rate coding: entry (t, i) fires with probability features[i].
SpikeTrain rate_encode(std::span<const double> features, std::size_t timesteps,
                       std::uint64_t seed);

struct SyntheticSpec {
  std::size_t n_classes = 2;
  std::size_t width = 16;
  std::size_t timesteps = 4;
  double flip_noise = 0.05;
  std::size_t count_per_class = 100;
  std::uint64_t seed = 0;
  // Index of the first sample per class. Disjoint ranges under one seed give
  // independent noise around the same prototypes (e.g. train / eval splits).
  std::size_t first_sample = 0;
};

// Class prototype bit patterns used by synthetic_patterns for `spec`.
// Prototypes are distinct and greedily spread apart in Hamming distance.
std::vector<std::vector<std::uint8_t>> class_prototypes(const SyntheticSpec& spec);

// Each sample is its class prototype with every bit flipped independently
// with probability flip_noise, held constant over all timesteps. Samples are
// interleaved by class.
LabeledSpikeDataset synthetic_patterns(const SyntheticSpec& spec);

// CSV of feature rows in [0, 1] with an integer label in the last column.
// Row r is rate encoded with a seed derived from (seed, r).
LabeledSpikeDataset load_feature_csv(const std::filesystem::path& path,
                                     std::size_t timesteps, std::uint64_t seed);

}  // namespace snnlth
