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

#include "snnlth/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "snnlth/digest.hpp"
#include "snnlth/errors.hpp"

namespace snnlth {

namespace {

constexpr char kMagic[8] = {'S', 'N', 'N', 'L', 'T', 'H', 'C', 'K'};

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int b = 0; b < 4; ++b) u8(static_cast<std::uint8_t>(v >> (8 * b)));
  }
  void u64(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) u8(static_cast<std::uint8_t>(v >> (8 * b)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f64s(std::span<const double> vs) {
    for (double v : vs) f64(v);
  }
  void bits(std::span<const std::uint8_t> bs) {
    for (std::size_t i = 0; i < bs.size(); i += 8) {
      std::uint8_t byte = 0;
      for (std::size_t b = 0; b < 8 && i + b < bs.size(); ++b) byte |= (bs[i + b] ? 1u : 0u) << b;
      u8(byte);
    }
  }
  void raw(const char* p, std::size_t n) { buf_.append(p, n); }
  std::string& str() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view s) : s_(s) {}
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(s_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(u8()) << (8 * b);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(u8()) << (8 * b);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  void f64s(std::span<double> out) {
    need(out.size() * 8);
    for (double& v : out) v = f64();
  }
  void bits(std::span<std::uint8_t> out) {
    need((out.size() + 7) / 8);
    for (std::size_t i = 0; i < out.size(); i += 8) {
      const std::uint8_t byte = u8();
      for (std::size_t b = 0; b < 8 && i + b < out.size(); ++b) out[i + b] = (byte >> b) & 1u;
    }
  }
  std::string_view take(std::size_t n) {
    need(n);
    auto v = s_.substr(pos_, n);
    pos_ += n;
    return v;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return s_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (s_.size() - pos_ < n) throw ParseError("checkpoint truncated at byte " + std::to_string(pos_));
  }
  std::string_view s_;
  std::size_t pos_ = 0;
};

std::uint64_t fnv(std::string_view bytes) {
  Digest d;
  d.add(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
  return d.value();
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ck) {
  const auto& net = ck.net;
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  w.u64(ck.rng_digest);
  w.u32(ck.scores ? 1u : 0u);
  w.u32(static_cast<std::uint32_t>(net.depth()));
  if (ck.scores && ck.scores->size() != net.depth()) {
    throw DomainError("checkpoint: one score matrix per layer required");
  }
  for (std::size_t l = 0; l < net.depth(); ++l) {
    const auto& layer = net.layers[l];
    const auto& p = net.params[l];
    w.u64(layer.out_dim());
    w.u64(layer.in_dim());
    w.f64(p.beta);
    w.f64(p.u_th);
    w.f64(p.v_reset);
    w.f64s(layer.weights.flat());
    w.bits(layer.mask.flat());
    w.u8(layer.norm ? 1 : 0);
    if (layer.norm) {
      w.f64(layer.norm->eps_bn);
      w.f64s(layer.norm->gamma);
      w.f64s(layer.norm->sigma_b);
      w.f64s(layer.norm->mu_b);
      w.f64s(layer.norm->shift);
    }
    if (ck.scores) {
      const auto& s = (*ck.scores)[l];
      if (!s.same_shape(layer.weights)) throw DomainError("checkpoint: score shape differs from weights");
      w.f64s(s.flat());
    }
  }
  w.u64(fnv(w.str()));
  return std::move(w.str());
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  if (r.remaining() < sizeof kMagic || std::memcmp(r.take(sizeof kMagic).data(), kMagic, sizeof kMagic) != 0) {
    throw ParseError("not a checkpoint (bad magic)");
  }
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw VersionError("checkpoint format version " + std::to_string(version) +
                       " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint ck;
  ck.rng_digest = r.u64();
  const auto flags = r.u32();
  if (flags > 1u) throw ParseError("checkpoint: unknown flags");
  const auto depth = r.u32();
  if (flags & 1u) ck.scores.emplace();
  for (std::uint32_t l = 0; l < depth; ++l) {
    const auto n_out = r.u64();
    const auto n_in = r.u64();
    if (n_out == 0 || n_in == 0 || n_out * n_in / n_in != n_out || n_out * n_in > r.remaining()) {
      throw ParseError("checkpoint: implausible layer shape");
    }
    LifParams p;
    p.beta = r.f64();
    p.u_th = r.f64();
    p.v_reset = r.f64();
    MaskedDenseLayer layer(Matrix(n_out, n_in));
    r.f64s(layer.weights.flat());
    r.bits(layer.mask.flat());
    const auto has_norm = r.u8();
    if (has_norm > 1) throw ParseError("checkpoint: bad normalization flag");
    if (has_norm) {
      NormParams norm = NormParams::unit(n_out);
      norm.eps_bn = r.f64();
      r.f64s(norm.gamma);
      r.f64s(norm.sigma_b);
      r.f64s(norm.mu_b);
      r.f64s(norm.shift);
      layer.norm = std::move(norm);
    }
    if (ck.scores) {
      Matrix s(n_out, n_in);
      r.f64s(s.flat());
      ck.scores->push_back(std::move(s));
    }
    try {
      ck.net.add_layer(std::move(layer), p);
    } catch (const DomainError& e) {
      throw ParseError(std::string("checkpoint: ") + e.what());
    }
  }
  const std::size_t body = r.pos();
  const auto stored = r.u64();
  if (stored != fnv(std::string_view(bytes).substr(0, body))) throw ParseError("checkpoint: digest mismatch");
  if (r.remaining() != 0) throw ParseError("checkpoint: trailing bytes");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  const auto bytes = encode_checkpoint(ck);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError(path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace snnlth
