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

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ive/common/prng.hpp"
#include "ive/modring/params.hpp"
#include "ive/modring/ring.hpp"

namespace ive {

/// Plaintext polynomial over Z_P: N coefficients in [0, P).
struct Plaintext {
  std::vector<std::uint64_t> coeffs;
  friend bool operator==(const Plaintext&, const Plaintext&) = default;
};

inline RnsPoly uniform_poly(const RingPtr& ring, Prng& rng, Domain dom) {
  RnsPoly p(ring, dom);
  for (std::size_t i = 0; i < ring->num_moduli(); ++i) {
    const std::uint32_t q = ring->modulus(i).value();
    for (auto& v : p.residue(i)) v = static_cast<std::uint32_t>(rng.uniform(q));
  }
  return p;
}

/// Fresh error polynomial with coefficients from the discrete Gaussian, Eval domain.
inline RnsPoly error_poly(const RingPtr& ring, const DiscreteGaussian& g, Prng& rng) {
  std::vector<std::int64_t> e(ring->degree());
  for (auto& v : e) v = g.sample(rng);
  return ntt_forward(RnsPoly::from_signed(ring, e));
}

struct SecretKey {
  RnsPoly s;  // Eval domain
  std::vector<std::int8_t> coeffs;
  std::uint64_t seed = 0;

  static SecretKey generate(const PirParams& params, Prng& rng, std::uint64_t seed = 0) {
    SecretKey sk;
    sk.seed = seed;
    sk.coeffs.resize(params.n());
    std::vector<std::int64_t> c(params.n());
    for (std::uint32_t j = 0; j < params.n(); ++j) {
      sk.coeffs[j] = static_cast<std::int8_t>(static_cast<int>(rng.uniform(3)) - 1);
      c[j] = sk.coeffs[j];
    }
    sk.s = ntt_forward(RnsPoly::from_signed(params.ring(), c));
    return sk;
  }
};

/// RLWE pair with decryption relation b - a*s = Delta*m + e, Delta = floor(Q/P).
struct BfvCiphertext {
  RnsPoly a;
  RnsPoly b;

  BfvCiphertext& operator+=(const BfvCiphertext& o) {
    a += o.a;
    b += o.b;
    return *this;
  }
  BfvCiphertext& operator-=(const BfvCiphertext& o) {
    a -= o.a;
    b -= o.b;
    return *this;
  }
  friend BfvCiphertext operator+(BfvCiphertext x, const BfvCiphertext& y) { return x += y; }
  friend BfvCiphertext operator-(BfvCiphertext x, const BfvCiphertext& y) { return x -= y; }
  friend bool operator==(const BfvCiphertext&, const BfvCiphertext&) = default;

  /// Multiplies both components by a plaintext polynomial in the Eval domain.
  BfvCiphertext& mul_plain(const RnsPoly& p) {
    a *= p;
    b *= p;
    return *this;
  }
  static BfvCiphertext zero(const RingPtr& ring) {
    return {RnsPoly(ring, Domain::Eval), RnsPoly(ring, Domain::Eval)};
  }
};

/// Encryption of an arbitrary phase: b - a*s = phase + e.
inline BfvCiphertext encrypt_raw(const SecretKey& sk, const RnsPoly& phase, const PirParams& params,
                                 Prng& rng) {
  phase.require(Domain::Eval, "encryption");
  const RingPtr& ring = params.ring();
  DiscreteGaussian g(params.sigma());
  BfvCiphertext ct;
  ct.a = uniform_poly(ring, rng, Domain::Eval);
  ct.b = ct.a * sk.s;
  ct.b += error_poly(ring, g, rng);
  ct.b += phase;
  return ct;
}

/// Delta*m as an Eval-domain polynomial.
inline RnsPoly encode_scaled(const Plaintext& m, const PirParams& params) {
  if (m.coeffs.size() != params.n()) throw UsageError("plaintext must have N coefficients");
  BigCoeffPoly big;
  big.coeffs.resize(params.n());
  for (std::uint32_t j = 0; j < params.n(); ++j) {
    if (m.coeffs[j] >= params.p()) throw DomainError("plaintext coefficient not below P");
    big.coeffs[j] = m.coeffs[j];
  }
  RnsPoly p = crt_decompose(big, params.ring());
  p.scale(params.delta());
  return ntt_forward(p);
}

inline BfvCiphertext encrypt_bfv(const SecretKey& sk, const Plaintext& m, const PirParams& params,
                                 Prng& rng) {
  return encrypt_raw(sk, encode_scaled(m, params), params, rng);
}

/// Coefficients of b - a*s in [0, Q).
inline BigCoeffPoly decrypt_phase(const SecretKey& sk, const BfvCiphertext& ct) {
  RnsPoly ph = ct.b - ct.a * sk.s;
  return icrt_reconstruct(ntt_inverse(ph));
}

/// Signed representative of x in (-Q/2, Q/2], returned as (magnitude, negative).
inline std::pair<u128, bool> centered(u128 x, u128 q) {
  if (x > q / 2) return {q - x, true};
  return {x, false};
}

inline double log2_u128(u128 x) {
  if (x == 0) return -std::numeric_limits<double>::infinity();
  return std::log2(static_cast<double>(x));
}

struct NoiseBudget {
  double bits = 0;
  u128 max_error = 0;
};

/// Below one bit the rounding is no longer trustworthy: a ciphertext decrypted
/// with the wrong key has |e| close to Delta/2 in some coefficient and lands here.
inline constexpr double kMinTrustedBudgetBits = 1.0;

struct Decryption {
  Plaintext plaintext;
  NoiseBudget budget;
  bool exhausted = false;  // best-effort plaintext; the noise is too large to trust it
};

inline std::uint64_t round_to_plaintext(u128 x, const PirParams& params) {
  using boost::multiprecision::uint256_t;
  uint256_t num = uint256_t(static_cast<std::uint64_t>(x >> 64));
  num <<= 64;
  num += static_cast<std::uint64_t>(x);
  uint256_t q = uint256_t(static_cast<std::uint64_t>(params.q() >> 64));
  q <<= 64;
  q += static_cast<std::uint64_t>(params.q());
  num *= params.p();
  num += q / 2;
  num /= q;
  return static_cast<std::uint64_t>(num % params.p());
}

inline NoiseBudget budget_of(const BigCoeffPoly& phase, const Plaintext& m,
                             const PirParams& params) {
  const u128 q = params.q();
  const u128 delta = params.delta();
  NoiseBudget nb;
  for (std::size_t j = 0; j < phase.coeffs.size(); ++j) {
    u128 dm = (delta * m.coeffs[j]) % q;
    u128 e = phase.coeffs[j] >= dm ? phase.coeffs[j] - dm : phase.coeffs[j] + (q - dm);
    nb.max_error = std::max(nb.max_error, centered(e, q).first);
  }
  nb.bits = log2_u128(delta) - 1 - log2_u128(std::max<u128>(nb.max_error, 1));
  return nb;
}

inline Decryption decrypt_bfv(const SecretKey& sk, const BfvCiphertext& ct, const PirParams& params) {
  BigCoeffPoly ph = decrypt_phase(sk, ct);
  Decryption d;
  d.plaintext.coeffs.resize(ph.coeffs.size());
  for (std::size_t j = 0; j < ph.coeffs.size(); ++j)
    d.plaintext.coeffs[j] = round_to_plaintext(ph.coeffs[j], params);
  d.budget = budget_of(ph, d.plaintext, params);
  d.exhausted = d.budget.bits < kMinTrustedBudgetBits;
  return d;
}

/// bits = log2(Delta) - 1 - log2(max |b - a*s - Delta*m|).
inline NoiseBudget noise_budget(const SecretKey& sk, const BfvCiphertext& ct,
                                const PirParams& params) {
  return decrypt_bfv(sk, ct, params).budget;
}

/// Largest centered |phase - expected| for a modulus-level encryption.
inline u128 raw_error(const SecretKey& sk, const BfvCiphertext& ct, const BigCoeffPoly& expected,
                      const PirParams& params) {
  BigCoeffPoly ph = decrypt_phase(sk, ct);
  const u128 q = params.q();
  u128 worst = 0;
  for (std::size_t j = 0; j < ph.coeffs.size(); ++j) {
    u128 x = expected.coeffs[j] % q;
    u128 e = ph.coeffs[j] >= x ? ph.coeffs[j] - x : ph.coeffs[j] + (q - x);
    worst = std::max(worst, centered(e, q).first);
  }
  return worst;
}

}  // namespace ive
