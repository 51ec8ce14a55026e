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
#include "ive/modring/gadget.hpp"

namespace ive {

/// 2*ell RLWE rows. Row j < ell has phase -mu*z^j*s, row ell+j has phase mu*z^j.
struct RgswCiphertext {
  std::vector<BfvCiphertext> rows;
  friend bool operator==(const RgswCiphertext&, const RgswCiphertext&) = default;
};

/// Key-switching key for X -> X^r: ell rows with phase -aut_r(s)*z^j.
struct EvalKey {
  std::uint64_t r = 0;
  std::vector<BfvCiphertext> rows;
  friend bool operator==(const EvalKey&, const EvalKey&) = default;
};

inline RnsPoly z_power(const PirParams& params, std::uint32_t j) {
  return RnsPoly::constant(params.ring(), u128{1} << (params.log2_z() * j), Domain::Eval);
}

/// mu is a small plaintext (0, 1, X^k, ...) given in the Eval domain.
inline RgswCiphertext encrypt_rgsw(const SecretKey& sk, const RnsPoly& mu, const PirParams& params,
                                   Prng& rng) {
  mu.require(Domain::Eval, "RGSW encryption");
  RgswCiphertext g;
  const std::uint32_t ell = params.ell();
  g.rows.reserve(2 * ell);
  RnsPoly mu_s = mu * sk.s;
  mu_s.negate();
  for (std::uint32_t j = 0; j < ell; ++j) g.rows.push_back(encrypt_raw(sk, mu_s * z_power(params, j), params, rng));
  for (std::uint32_t j = 0; j < ell; ++j) g.rows.push_back(encrypt_raw(sk, mu * z_power(params, j), params, rng));
  return g;
}

inline RnsPoly monomial_plain(const PirParams& params, std::int64_t k) {
  return ntt_forward(monomial_mul(RnsPoly::constant(params.ring(), 1, Domain::Coeff), k));
}

inline RgswCiphertext encrypt_rgsw_int(const SecretKey& sk, std::int64_t mu, const PirParams& params,
                                       Prng& rng) {
  std::vector<std::int64_t> c(params.n(), 0);
  c[0] = mu;
  return encrypt_rgsw(sk, ntt_forward(RnsPoly::from_signed(params.ring(), c)), params, rng);
}

/// g (2 x 2ell) times (Dcp(a), Dcp(b)).
inline BfvCiphertext external_product(const RgswCiphertext& g, const BfvCiphertext& c,
                                      const PirParams& params) {
  const std::uint32_t ell = params.ell();
  if (g.rows.size() != 2 * ell) throw UsageError("RGSW ciphertext must have 2*ell rows");
  auto da = gadget_decompose(c.a, params);
  auto db = gadget_decompose(c.b, params);
  BfvCiphertext out = BfvCiphertext::zero(params.ring());
  for (std::uint32_t j = 0; j < ell; ++j) {
    out.a.mul_add(da[j], g.rows[j].a);
    out.b.mul_add(da[j], g.rows[j].b);
    out.a.mul_add(db[j], g.rows[ell + j].a);
    out.b.mul_add(db[j], g.rows[ell + j].b);
  }
  return out;
}

/// g ⊡ (c1 - c0) + c0: selects c1 when g encrypts 1 and c0 when it encrypts 0.
inline BfvCiphertext cmux(const RgswCiphertext& g, const BfvCiphertext& c0, const BfvCiphertext& c1,
                          const PirParams& params) {
  return external_product(g, c1 - c0, params) + c0;
}

inline EvalKey make_eval_key(const SecretKey& sk, std::uint64_t r, const PirParams& params,
                             Prng& rng) {
  EvalKey k;
  k.r = r;
  RnsPoly aut_s = automorphism_map(sk.s, r);
  aut_s.negate();
  for (std::uint32_t j = 0; j < params.ell(); ++j)
    k.rows.push_back(encrypt_raw(sk, aut_s * z_power(params, j), params, rng));
  return k;
}

/// Subs(c, r) = evk_r * Dcp(a_aut) + (0, b_aut); decrypts to m(X^r).
inline BfvCiphertext substitute(const BfvCiphertext& c, std::uint64_t r, const EvalKey& evk,
                                const PirParams& params) {
  const std::uint64_t two_n = 2ull * params.n();
  if (evk.r % two_n != r % two_n)
    throw UsageError("evaluation key exponent " + std::to_string(evk.r) + " does not match r = " +
                     std::to_string(r));
  if (evk.rows.size() != params.ell()) throw UsageError("evaluation key must have ell rows");
  RnsPoly a_aut = automorphism_map(c.a, r);
  BfvCiphertext out{RnsPoly(params.ring(), Domain::Eval), automorphism_map(c.b, r)};
  auto digits = gadget_decompose(a_aut, params);
  for (std::uint32_t j = 0; j < params.ell(); ++j) {
    out.a.mul_add(digits[j], evk.rows[j].a);
    out.b.mul_add(digits[j], evk.rows[j].b);
  }
  return out;
}

}  // namespace ive
