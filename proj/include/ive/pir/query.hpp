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

#include "ive/crypto/bfv.hpp"
#include "ive/crypto/container.hpp"

namespace ive {

struct PirQuery {
  BfvCiphertext ct;
};

struct PirResponse {
  BfvCiphertext ct;
};

/// Target polynomial p split into the first-dimension column and the
/// selector bits: i* = p % D0, b_t = bit (t-1) of the row p / D0.
struct QueryTarget {
  std::uint32_t column = 0;
  std::vector<std::uint8_t> bits;
};

inline QueryTarget split_index(std::uint64_t poly_index, const PirParams& params) {
  if (poly_index >= params.total_polys())
    throw DomainError("index " + std::to_string(poly_index) + " out of range (D = " +
                      std::to_string(params.total_polys()) + ")");
  QueryTarget t;
  t.column = static_cast<std::uint32_t>(poly_index % params.d0());
  std::uint64_t row = poly_index / params.d0();
  for (std::uint32_t k = 0; k < params.d(); ++k) t.bits.push_back(static_cast<std::uint8_t>((row >> k) & 1));
  return t;
}

/// Packed query plaintext in residue form (Eval domain): slot i* holds
/// Delta/2^m, slot D0 + (t-1)*ell + j holds b_t*z^j/2^m, inverses mod Q.
inline RnsPoly query_plaintext(std::uint64_t poly_index, const PirParams& params) {
  QueryTarget t = split_index(poly_index, params);
  const RingPtr& ring = params.ring();
  RnsPoly pt(ring, Domain::Coeff);
  const std::uint64_t two_m = std::uint64_t{1} << params.m();
  const u128 delta = params.delta();
  for (std::size_t i = 0; i < ring->num_moduli(); ++i) {
    const Modulus& q = ring->modulus(i);
    const std::uint32_t inv = q.inv(q.reduce(two_m));
    auto res = pt.residue(i);
    res[t.column] = q.mul(q.reduce128(delta), inv);
    for (std::uint32_t dim = 0; dim < params.d(); ++dim) {
      if (!t.bits[dim]) continue;
      for (std::uint32_t j = 0; j < params.ell(); ++j) {
        std::uint32_t zj = q.reduce128(u128{1} << (params.log2_z() * j));
        res[params.d0() + dim * params.ell() + j] = q.mul(zj, inv);
      }
    }
  }
  return ntt_forward(pt);
}

inline PirQuery build_query(const SecretKey& sk, std::uint64_t poly_index, const PirParams& params,
                            Prng& rng) {
  return PirQuery{encrypt_raw(sk, query_plaintext(poly_index, params), params, rng)};
}

inline Bytes serialize_query(const PirQuery& q, const PirParams& params) {
  return serialize_ct(q.ct, params, ObjectKind::Query);
}
inline PirQuery deserialize_query(std::span<const std::uint8_t> b, const PirParams& params) {
  auto q = PirQuery{deserialize_ct(b, params, ObjectKind::Query)};
  if (q.ct.a.domain() != Domain::Eval) throw FormatError("query must be in Eval domain");
  return q;
}
inline Bytes serialize_response(const PirResponse& r, const PirParams& params) {
  return serialize_ct(r.ct, params, ObjectKind::Response);
}
inline PirResponse deserialize_response(std::span<const std::uint8_t> b, const PirParams& params) {
  return PirResponse{deserialize_ct(b, params, ObjectKind::Response)};
}

}  // namespace ive
