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
#include <vector>

#include "ive/modring/params.hpp"
#include "ive/modring/ring.hpp"

namespace ive {

/// Unsigned base-z digits of every coefficient: x = sum_j x_j z^j with
/// x_j in [0, z). Input and outputs are in the Eval domain.
inline std::vector<RnsPoly> gadget_decompose(const RnsPoly& p, std::uint32_t log2_z,
                                             std::uint32_t ell) {
  p.require(Domain::Eval, "gadget decomposition");
  const RingPtr& ring = p.ring();
  const std::uint32_t n = ring->degree();
  const std::size_t k = ring->num_moduli();
  RnsPoly c = ntt_inverse(p);
  std::vector<RnsPoly> digits;
  digits.reserve(ell);
  for (std::uint32_t j = 0; j < ell; ++j) digits.emplace_back(ring, Domain::Coeff);
  const u128 mask = (u128{1} << log2_z) - 1;
  for (std::uint32_t col = 0; col < n; ++col) {
    u128 x = icrt_coefficient(c, col);
    for (std::uint32_t j = 0; j < ell; ++j) {
      auto dj = static_cast<std::uint32_t>(x & mask);
      x >>= log2_z;
      // z never exceeds the smallest modulus, so a digit is its own residue.
      for (std::size_t i = 0; i < k; ++i) digits[j].residue(i)[col] = dj;
    }
  }
  for (auto& dg : digits) dg.ntt_forward_inplace();
  return digits;
}

inline std::vector<RnsPoly> gadget_decompose(const RnsPoly& p, const PirParams& params) {
  return gadget_decompose(p, params.log2_z(), params.ell());
}

/// sum_j digits[j] * z^j, the inverse of gadget_decompose.
inline RnsPoly gadget_recompose(const std::vector<RnsPoly>& digits, std::uint32_t log2_z) {
  if (digits.empty()) throw UsageError("no digits to recompose");
  RnsPoly acc = RnsPoly::zero(digits[0].ring(), digits[0].domain());
  for (std::size_t j = 0; j < digits.size(); ++j) {
    RnsPoly t = digits[j];
    t.scale(u128{1} << (log2_z * j));
    acc += t;
  }
  return acc;
}

}  // namespace ive
