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

#include "snnlth/encode.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <string_view>

#include "snnlth/errors.hpp"
#include "snnlth/rng.hpp"

namespace snnlth {

void LabeledSpikeDataset::validate() const {
  for (const auto& s : samples) {
    if (s.spikes.width() != width || s.spikes.timesteps() != timesteps) {
      throw DomainError("dataset: sample shape differs from dataset shape");
    }
    if (s.label >= n_classes) throw DomainError("dataset: label out of range");
  }
}

SpikeTrain rate_encode(std::span<const double> features, std::size_t timesteps,
                       std::uint64_t seed) {
  if (timesteps == 0) throw DomainError("rate_encode: T must be >= 1");
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double f = features[i];
    if (!(f >= 0.0 && f <= 1.0)) {
      throw DomainError("rate_encode: feature " + std::to_string(i) +
                        " outside [0, 1]: " + std::to_string(f));
    }
  }
  SpikeTrain train(timesteps, features.size());
  Rng rng(seed);
  for (std::size_t t = 0; t < timesteps; ++t) {
    for (std::size_t i = 0; i < features.size(); ++i) {
      train.set(t, i, bernoulli(rng, features[i]));
    }
  }
  return train;
}

namespace {

std::size_t hamming(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

void check_spec(const SyntheticSpec& spec) {
  if (spec.width == 0 || spec.timesteps == 0 || spec.n_classes == 0) {
    throw DomainError("synthetic_patterns: width, timesteps and n_classes must be positive");
  }
  if (spec.width < 63 && spec.n_classes > (std::size_t{1} << spec.width)) {
    throw DomainError("synthetic_patterns: n_classes exceeds 2^N distinct patterns");
  }
  if (!(spec.flip_noise >= 0.0 && spec.flip_noise < 0.5)) {
    throw DomainError("synthetic_patterns: flip_noise must lie in [0, 0.5)");
  }
}

}  // namespace

std::vector<std::vector<std::uint8_t>> class_prototypes(const SyntheticSpec& spec) {
  check_spec(spec);
  constexpr int kCandidates = 64;
  Rng rng(derive_seed(spec.seed, {0x70726f74ULL}));
  std::vector<std::vector<std::uint8_t>> protos;
  std::vector<std::uint8_t> cand(spec.width);
  while (protos.size() < spec.n_classes) {
    std::vector<std::uint8_t> best;
    std::size_t best_d = 0;
    for (int c = 0; c < kCandidates; ++c) {
      for (auto& b : cand) b = bernoulli(rng, 0.5) ? 1 : 0;
      std::size_t d = std::numeric_limits<std::size_t>::max();
      for (const auto& p : protos) d = std::min(d, hamming(p, cand));
      if (best.empty() || d > best_d) {
        best = cand;
        best_d = d;
      }
    }
    // Distance 0 means a duplicate; keep drawing.
    if (best_d > 0) protos.push_back(std::move(best));
  }
  return protos;
}

LabeledSpikeDataset synthetic_patterns(const SyntheticSpec& spec) {
  const auto protos = class_prototypes(spec);
  LabeledSpikeDataset ds;
  ds.n_classes = spec.n_classes;
  ds.width = spec.width;
  ds.timesteps = spec.timesteps;
  ds.samples.reserve(spec.n_classes * spec.count_per_class);
  for (std::size_t k = 0; k < spec.count_per_class; ++k) {
    for (std::size_t c = 0; c < spec.n_classes; ++c) {
      Rng rng(derive_seed(spec.seed, {0x73616d70ULL, c, spec.first_sample + k}));
      LabeledSample s{SpikeTrain(spec.timesteps, spec.width), c};
      for (std::size_t i = 0; i < spec.width; ++i) {
        const bool bit = (protos[c][i] != 0) != bernoulli(rng, spec.flip_noise);
        for (std::size_t t = 0; t < spec.timesteps; ++t) s.spikes.set(t, i, bit);
      }
      ds.samples.push_back(std::move(s));
    }
  }
  return ds;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

LabeledSpikeDataset load_feature_csv(const std::filesystem::path& path,
                                     std::size_t timesteps, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw MissingFileError(path.string());
  if (timesteps == 0) throw DomainError("load_feature_csv: T must be >= 1");

  LabeledSpikeDataset ds;
  ds.timesteps = timesteps;
  std::string line;
  std::size_t line_no = 0;
  std::size_t row = 0;
  std::vector<double> features;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string_view> cols;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      cols.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cols.size() < 2) throw ParseError("expected at least one feature and a label", line_no);
    features.assign(cols.size() - 1, 0.0);
    for (std::size_t c = 0; c + 1 < cols.size(); ++c) {
      if (!parse_number(cols[c], features[c])) {
        throw ParseError("column " + std::to_string(c + 1) + ": not a number", line_no);
      }
      if (!(features[c] >= 0.0 && features[c] <= 1.0)) {
        throw DomainError("line " + std::to_string(line_no) + ", column " +
                          std::to_string(c + 1) + ": feature outside [0, 1]");
      }
    }
    std::size_t label = 0;
    if (!parse_number(cols.back(), label)) {
      throw ParseError("column " + std::to_string(cols.size()) + ": label is not a non-negative integer",
                       line_no);
    }
    if (ds.samples.empty()) {
      ds.width = features.size();
    } else if (features.size() != ds.width) {
      throw ParseError("expected " + std::to_string(ds.width) + " features, got " +
                           std::to_string(features.size()),
                       line_no);
    }
    ds.samples.push_back({rate_encode(features, timesteps, derive_seed(seed, {row})), label});
    ds.n_classes = std::max(ds.n_classes, label + 1);
    ++row;
  }
  return ds;
}

}  // namespace snnlth
