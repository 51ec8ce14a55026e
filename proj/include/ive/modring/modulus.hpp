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

#include <cstdint>

#include "ive/common/error.hpp"

namespace ive {

using u128 = unsigned __int128;

/// A word-sized prime modulus q < 2^31 with a precomputed Barrett ratio.
/// Products of two reduced operands are < 2^62 and reduce with one
/// correction step.
class Modulus {
 public:
  constexpr Modulus() = default;
  explicit constexpr Modulus(std::uint32_t q)
      : q_(q), ratio_(static_cast<std::uint64_t>((u128{1} << 64) / q)) {}

  constexpr std::uint32_t value() const { return q_; }

  constexpr std::uint32_t reduce(std::uint64_t x) const {
    std::uint64_t est = static_cast<std::uint64_t>((u128{x} * ratio_) >> 64);
    std::uint64_t r = x - est * q_;
    return static_cast<std::uint32_t>(r >= q_ ? r - q_ : r);
  }
  constexpr std::uint32_t reduce128(u128 x) const {
    return static_cast<std::uint32_t>(x % q_);
  }
  constexpr std::uint32_t add(std::uint32_t a, std::uint32_t b) const {
    std::uint32_t s = a + b;
    return s >= q_ ? s - q_ : s;
  }
  constexpr std::uint32_t sub(std::uint32_t a, std::uint32_t b) const {
    return a >= b ? a - b : a + q_ - b;
  }
  constexpr std::uint32_t neg(std::uint32_t a) const { return a == 0 ? 0 : q_ - a; }
  constexpr std::uint32_t mul(std::uint32_t a, std::uint32_t b) const {
    return reduce(std::uint64_t{a} * b);
  }
  constexpr std::uint32_t pow(std::uint32_t base, std::uint64_t e) const {
    std::uint32_t r = 1 % q_;
    while (e) {
      if (e & 1) r = mul(r, base);
      base = mul(base, base);
      e >>= 1;
    }
    return r;
  }
  /// Inverse by Fermat; q must be prime and a nonzero mod q.
  constexpr std::uint32_t inv(std::uint32_t a) const {
    if (a % q_ == 0) throw DomainError("zero has no modular inverse");
    return pow(a % q_, q_ - 2);
  }

  /// Shoup companion of a constant w: floor(w * 2^64 / q).
  constexpr std::uint64_t shoup(std::uint32_t w) const {
    return static_cast<std::uint64_t>((u128{w} << 64) / q_);
  }
  /// x * w mod q given w's Shoup companion; result in [0, q).
  constexpr std::uint32_t mul_shoup(std::uint32_t x, std::uint32_t w,
                                    std::uint64_t w_shoup) const {
    std::uint64_t hi = static_cast<std::uint64_t>((u128{x} * w_shoup) >> 64);
    std::uint64_t r = std::uint64_t{x} * w - hi * q_;
    return static_cast<std::uint32_t>(r >= q_ ? r - q_ : r);
  }

  friend constexpr bool operator==(const Modulus& a, const Modulus& b) {
    return a.q_ == b.q_;
  }

 private:
  std::uint32_t q_ = 0;
  std::uint64_t ratio_ = 0;
};

/// Deterministic Miller-Rabin, exact for all 32-bit inputs.
constexpr bool is_prime_u32(std::uint32_t n) {
  if (n < 2) return false;
  for (std::uint32_t p : {2u, 3u, 5u, 7u}) {
    if (n % p == 0) return n == p;
  }
  std::uint32_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  auto mulmod = [n](std::uint64_t a, std::uint64_t b) { return (a * b) % n; };
  for (std::uint64_t a : {2ull, 7ull, 61ull}) {
    if (a % n == 0) continue;
    std::uint64_t x = 1, b = a, e = d;
    while (e) {
      if (e & 1) x = mulmod(x, b);
      b = mulmod(b, b);
      e >>= 1;
    }
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

}  // namespace ive
