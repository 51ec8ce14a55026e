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

#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ive/modring/modulus.hpp"

namespace ive {

inline std::uint32_t bit_reverse(std::uint32_t x, int bits) {
  std::uint32_t r = 0;
  for (int i = 0; i < bits; ++i) {
    r = (r << 1) | (x & 1);
    x >>= 1;
  }
  return r;
}

/// Twiddle tables for the negacyclic NTT over Z_q[X]/(X^N + 1).
///
/// The forward transform takes natural-order coefficients and leaves the
/// evaluations in bit-reversed order: slot i holds p(psi^(2*brv(i)+1)) where
/// psi is a primitive 2N-th root of unity. The inverse undoes this exactly.
class NttTables {
 public:
  NttTables(std::uint32_t n, Modulus mod) : n_(n), log_n_(std::countr_zero(n)), mod_(mod) {
    const std::uint32_t q = mod.value();
    if (!std::has_single_bit(n) || n < 2)
      throw ConfigError("ring degree must be a power of two");
    if ((q - 1) % (2 * n) != 0)
      throw ConfigError("modulus " + std::to_string(q) + " is not 1 mod 2N");
    psi_ = find_psi();
    const std::uint32_t psi_inv = mod_.inv(psi_);

    root_.resize(n);
    root_shoup_.resize(n);
    inv_root_.resize(n);
    inv_root_shoup_.resize(n);
    std::uint32_t p = 1, pi = 1;
    std::vector<std::uint32_t> pw(n), pwi(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      pw[i] = p;
      pwi[i] = pi;
      p = mod_.mul(p, psi_);
      pi = mod_.mul(pi, psi_inv);
    }
    for (std::uint32_t i = 0; i < n; ++i) {
      std::uint32_t r = bit_reverse(i, log_n_);
      root_[i] = pw[r];
      root_shoup_[i] = mod_.shoup(root_[i]);
      inv_root_[i] = pwi[r];
      inv_root_shoup_[i] = mod_.shoup(inv_root_[i]);
    }
    n_inv_ = mod_.inv(n % q);
    n_inv_shoup_ = mod_.shoup(n_inv_);
  }

  std::uint32_t degree() const { return n_; }
  int log_degree() const { return log_n_; }
  const Modulus& modulus() const { return mod_; }
  std::uint32_t psi() const { return psi_; }

  /// Exponent e (odd, mod 2N) of the evaluation point psi^e held by slot i.
  std::uint32_t slot_exponent(std::uint32_t i) const {
    return 2 * bit_reverse(i, log_n_) + 1;
  }

  void forward(std::span<std::uint32_t> a) const {
    const std::uint32_t q = mod_.value();
    std::uint32_t t = n_;
    for (std::uint32_t m = 1; m < n_; m <<= 1) {
      t >>= 1;
      for (std::uint32_t i = 0; i < m; ++i) {
        const std::uint32_t j1 = 2 * i * t;
        const std::uint32_t w = root_[m + i];
        const std::uint64_t ws = root_shoup_[m + i];
        std::uint32_t* x = a.data() + j1;
        std::uint32_t* y = x + t;
        for (std::uint32_t j = 0; j < t; ++j) {
          std::uint32_t u = x[j];
          std::uint32_t v = mod_.mul_shoup(y[j], w, ws);
          std::uint32_t s = u + v;
          x[j] = s >= q ? s - q : s;
          y[j] = u >= v ? u - v : u + q - v;
        }
      }
    }
  }

  void inverse(std::span<std::uint32_t> a) const {
    const std::uint32_t q = mod_.value();
    std::uint32_t t = 1;
    for (std::uint32_t m = n_; m > 1; m >>= 1) {
      std::uint32_t j1 = 0;
      const std::uint32_t h = m >> 1;
      for (std::uint32_t i = 0; i < h; ++i) {
        const std::uint32_t w = inv_root_[h + i];
        const std::uint64_t ws = inv_root_shoup_[h + i];
        std::uint32_t* x = a.data() + j1;
        std::uint32_t* y = x + t;
        for (std::uint32_t j = 0; j < t; ++j) {
          std::uint32_t u = x[j], v = y[j];
          std::uint32_t s = u + v;
          x[j] = s >= q ? s - q : s;
          y[j] = mod_.mul_shoup(u >= v ? u - v : u + q - v, w, ws);
        }
        j1 += 2 * t;
      }
      t <<= 1;
    }
    for (auto& v : a) v = mod_.mul_shoup(v, n_inv_, n_inv_shoup_);
  }

 private:
  std::uint32_t find_psi() const {
    const std::uint32_t q = mod_.value();
    const std::uint64_t order = 2ull * n_;
    for (std::uint32_t g = 2; g < q; ++g) {
      std::uint32_t cand = mod_.pow(g, (q - 1) / order);
      // Primitive 2N-th root iff cand^N == -1.
      if (mod_.pow(cand, n_) == q - 1) return cand;
    }
    throw ConfigError("no primitive 2N-th root of unity");
  }

  std::uint32_t n_;
  int log_n_;
  Modulus mod_;
  std::uint32_t psi_ = 0;
  std::vector<std::uint32_t> root_, inv_root_;
  std::vector<std::uint64_t> root_shoup_, inv_root_shoup_;
  std::uint32_t n_inv_ = 0;
  std::uint64_t n_inv_shoup_ = 0;
};

}  // namespace ive
