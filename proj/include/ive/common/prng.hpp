// Copyright 2026 The IVE-PIR Authors.
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

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include <sodium.h>

#include "ive/common/bytes.hpp"

namespace ive {

/// Deterministic ChaCha20 keystream generator. The same seed always yields
/// the same stream; there is no hidden global state.
class Prng {
 public:
  explicit Prng(std::uint64_t seed) {
    Sha256 h;
    h.update(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>("ive.prng.v1"), 11));
    h.update_u64(seed);
    key_ = h.finish();
  }

  std::uint64_t next_u64() {
    if (pos_ + 8 > buf_.size()) refill();
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{buf_[pos_ + i]} << (8 * i);
    pos_ += 8;
    return v;
  }

  /// Uniform in [0, bound) by rejection; bound must be nonzero.
  std::uint64_t uniform(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    for (;;) {
      std::uint64_t v = next_u64();
      if (v < limit) return v % bound;
    }
  }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// A new independent generator derived from this stream.
  Prng fork() { return Prng(next_u64()); }

 private:
  void refill() {
    std::array<std::uint8_t, crypto_stream_chacha20_NONCEBYTES> nonce{};
    for (std::size_t i = 0; i < nonce.size(); ++i)
      nonce[i] = static_cast<std::uint8_t>(counter_ >> (8 * i));
    ++counter_;
    crypto_stream_chacha20(buf_.data(), buf_.size(), nonce.data(), key_.data());
    pos_ = 0;
  }

  Digest key_{};
  std::array<std::uint8_t, 4096> buf_{};
  std::size_t pos_ = 4096;
  std::uint64_t counter_ = 0;
};

/// Centered discrete Gaussian truncated at 6 sigma, sampled by inversion of a
/// cumulative table. sigma == 0 always returns 0 (noiseless test vectors).
class DiscreteGaussian {
 public:
  explicit DiscreteGaussian(double sigma) : sigma_(sigma) {
    if (sigma_ <= 0) return;
    bound_ = static_cast<int>(std::floor(6 * sigma_));
    double total = 0;
    std::vector<double> w;
    for (int x = -bound_; x <= bound_; ++x) {
      w.push_back(std::exp(-double(x) * x / (2 * sigma_ * sigma_)));
      total += w.back();
    }
    double acc = 0;
    for (double wi : w) {
      acc += wi / total;
      cdf_.push_back(acc);
    }
    cdf_.back() = 1.0;
  }

  std::int64_t sample(Prng& rng) const {
    if (sigma_ <= 0) return 0;
    double u = rng.uniform_double();
    std::size_t lo = 0, hi = cdf_.size() - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (u < cdf_[mid]) hi = mid;
      else lo = mid + 1;
    }
    return static_cast<std::int64_t>(lo) - bound_;
  }

  double sigma() const { return sigma_; }
  int bound() const { return bound_; }

 private:
  double sigma_;
  int bound_ = 0;
  std::vector<double> cdf_;
};

}  // namespace ive
