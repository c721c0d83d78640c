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

#include <bit>
#include <cstdint>
#include <span>

#include "snnlth/grid.hpp"

namespace snnlth {

// FNV-1a over the little-endian byte image of the values.
class Digest {
 public:
  void add_u64(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      state_ ^= (v >> (8 * b)) & 0xffu;
      state_ *= 0x100000001b3ULL;
    }
  }
  void add(double v) { add_u64(std::bit_cast<std::uint64_t>(v)); }
  void add(std::span<const double> vs) {
    for (double v : vs) add(v);
  }
  void add(std::span<const std::uint8_t> bs) {
    for (auto b : bs) {
      state_ ^= b;
      state_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t digest_of(const Matrix& m) {
  Digest d;
  d.add_u64(m.rows());
  d.add_u64(m.cols());
  d.add(m.flat());
  return d.value();
}

}  // namespace snnlth
