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

// Binary checkpoint container, little-endian throughout.
//
//   "SNNLTHCK"                      magic, 8 bytes
//   u32 version (= 1)
//   u64 rng_digest
//   u32 flags                        bit 0: scores present
//   u32 layer count
//   per layer:
//     u64 n_out, u64 n_in
//     f64 beta, u_th, v_reset
//     f64[n_out * n_in] weights      row-major
//     u8[ceil(n_out * n_in / 8)]     mask bitset, LSB first
//     u8 has_norm
//     if has_norm: f64 eps_bn, f64[n_out] gamma, sigma_b, mu_b, shift
//     if scores: f64[n_out * n_in]
//   u64 FNV-1a digest of every preceding byte

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "snnlth/core.hpp"

namespace snnlth {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  SpikingNetwork net;
  std::optional<std::vector<Matrix>> scores;
  std::uint64_t rng_digest = 0;
};

std::string encode_checkpoint(const Checkpoint& ck);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace snnlth
