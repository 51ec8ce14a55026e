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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ive/common/bytes.hpp"
#include "ive/common/error.hpp"
#include "ive/modring/modulus.hpp"
#include "ive/modring/ntt.hpp"

namespace ive {

/// Precomputed state for R_Q = Z_Q[X]/(X^N + 1) with Q = prod q_i in RNS form:
/// NTT tables, CRT reconstruction constants and root-of-unity powers. Built
/// once, immutable, shared read-only by every polynomial over the ring.
class RingContext {
 public:
  static constexpr std::size_t kMaxModuli = 4;
  static constexpr std::uint32_t kModulusBound = 1u << 28;

  RingContext(std::uint32_t n, const std::vector<std::uint32_t>& moduli) : n_(n) {
    if (!std::has_single_bit(n) || n < 4) throw ConfigError("N must be a power of two >= 4");
    if (moduli.empty() || moduli.size() > kMaxModuli)
      throw ConfigError("between 1 and 4 residue moduli are supported");
    for (std::size_t i = 0; i < moduli.size(); ++i) {
      std::uint32_t q = moduli[i];
      if (q >= kModulusBound) throw ConfigError("modulus " + std::to_string(q) + " is not below 2^28");
      if (!is_prime_u32(q)) throw ConfigError("modulus " + std::to_string(q) + " is not prime");
      if ((q - 1) % (2 * n) != 0)
        throw ConfigError("modulus " + std::to_string(q) + " is not 1 mod 2N");
      for (std::size_t k = 0; k < i; ++k)
        if (moduli[k] == q) throw ConfigError("duplicate modulus " + std::to_string(q));
      mods_.emplace_back(q);
      tables_.emplace_back(n, mods_.back());
    }
    big_q_ = 1;
    for (auto& m : mods_) big_q_ *= m.value();
    log2_q_ = 0;
    for (auto& m : mods_) log2_q_ += std::log2(double(m.value()));
    for (std::size_t i = 0; i < mods_.size(); ++i) {
      u128 hat = big_q_ / mods_[i].value();
      q_hat_.push_back(hat);
      std::uint32_t hat_mod = mods_[i].reduce128(hat);
      std::uint32_t hinv = mods_[i].inv(hat_mod);
      q_hat_inv_.push_back(hinv);
      q_hat_inv_shoup_.push_back(mods_[i].shoup(hinv));
    }
    psi_pow_.resize(mods_.size() * n);
    for (std::size_t i = 0; i < mods_.size(); ++i) {
      std::uint32_t p = 1;
      for (std::uint32_t k = 0; k < n; ++k) {
        psi_pow_[i * n + k] = p;
        p = mods_[i].mul(p, tables_[i].psi());
      }
    }
  }

  std::uint32_t degree() const { return n_; }
  int log_degree() const { return tables_[0].log_degree(); }
  std::size_t num_moduli() const { return mods_.size(); }
  const Modulus& modulus(std::size_t i) const { return mods_[i]; }
  const NttTables& ntt(std::size_t i) const { return tables_[i]; }
  u128 q() const { return big_q_; }
  double log2_q() const { return log2_q_; }
  u128 q_hat(std::size_t i) const { return q_hat_[i]; }
  std::uint32_t q_hat_inv(std::size_t i) const { return q_hat_inv_[i]; }
  std::uint64_t q_hat_inv_shoup(std::size_t i) const { return q_hat_inv_shoup_[i]; }

  std::vector<std::uint32_t> moduli_values() const {
    std::vector<std::uint32_t> v;
    for (auto& m : mods_) v.push_back(m.value());
    return v;
  }

  /// psi_i^k for any k, using psi^N = -1.
  std::uint32_t psi_power(std::size_t i, std::uint64_t k) const {
    k %= 2ull * n_;
    if (k < n_) return psi_pow_[i * n_ + k];
    return mods_[i].neg(psi_pow_[i * n_ + (k - n_)]);
  }

  /// Evaluation slot holding the point psi^e (e odd, mod 2N).
  std::uint32_t slot_of_exponent(std::uint64_t e) const {
    e %= 2ull * n_;
    return bit_reverse(static_cast<std::uint32_t>((e - 1) / 2), log_degree());
  }

  /// Residues of an arbitrary value x < 2^128 (reduced mod Q first).
  std::vector<std::uint32_t> residues_of(u128 x) const {
    std::vector<std::uint32_t> r;
    for (auto& m : mods_) r.push_back(m.reduce128(x));
    return r;
  }

  bool same_ring(const RingContext& o) const {
    return this == &o || (n_ == o.n_ && mods_ == o.mods_);
  }

 private:
  std::uint32_t n_;
  std::vector<Modulus> mods_;
  std::vector<NttTables> tables_;
  u128 big_q_ = 0;
  double log2_q_ = 0;
  std::vector<u128> q_hat_;
  std::vector<std::uint32_t> q_hat_inv_;
  std::vector<std::uint64_t> q_hat_inv_shoup_;
  std::vector<std::uint32_t> psi_pow_;
};

using RingPtr = std::shared_ptr<const RingContext>;

enum class Domain : std::uint8_t { Coeff = 0, Eval = 1 };

/// N coefficients in [0, Q), the iCRT output domain.
struct BigCoeffPoly {
  std::vector<u128> coeffs;
  friend bool operator==(const BigCoeffPoly&, const BigCoeffPoly&) = default;
};

/// A polynomial of R_Q in residue form: K rows of N words, row i reduced mod q_i.
class RnsPoly {
 public:
  RnsPoly() = default;
  RnsPoly(RingPtr ring, Domain dom)
      : ring_(std::move(ring)), dom_(dom), data_(ring_->num_moduli() * ring_->degree(), 0) {}

  static RnsPoly zero(const RingPtr& ring, Domain dom) { return RnsPoly(ring, dom); }

  /// Constant polynomial c (in either domain).
  static RnsPoly constant(const RingPtr& ring, u128 c, Domain dom) {
    RnsPoly p(ring, dom);
    const std::uint32_t n = ring->degree();
    for (std::size_t i = 0; i < ring->num_moduli(); ++i) {
      std::uint32_t r = ring->modulus(i).reduce128(c);
      if (dom == Domain::Coeff) {
        p.data_[i * n] = r;
      } else {
        std::fill_n(p.data_.begin() + i * n, n, r);
      }
    }
    return p;
  }

  /// Lifts small signed coefficients into every residue (Coeff domain).
  static RnsPoly from_signed(const RingPtr& ring, std::span<const std::int64_t> coeffs) {
    if (coeffs.size() != ring->degree()) throw UsageError("coefficient count must equal N");
    RnsPoly p(ring, Domain::Coeff);
    const std::uint32_t n = ring->degree();
    for (std::size_t i = 0; i < ring->num_moduli(); ++i) {
      const std::int64_t q = ring->modulus(i).value();
      for (std::uint32_t j = 0; j < n; ++j) {
        std::int64_t v = coeffs[j] % q;
        p.data_[i * n + j] = static_cast<std::uint32_t>(v < 0 ? v + q : v);
      }
    }
    return p;
  }

  const RingPtr& ring() const { return ring_; }
  Domain domain() const { return dom_; }
  bool empty() const { return !ring_; }
  std::uint32_t degree() const { return ring_->degree(); }
  std::size_t num_moduli() const { return ring_->num_moduli(); }

  std::span<std::uint32_t> residue(std::size_t i) {
    return {data_.data() + i * degree(), degree()};
  }
  std::span<const std::uint32_t> residue(std::size_t i) const {
    return {data_.data() + i * degree(), degree()};
  }
  std::span<std::uint32_t> words() { return data_; }
  std::span<const std::uint32_t> words() const { return data_; }
  std::uint32_t at(std::size_t i, std::size_t j) const { return data_[i * degree() + j]; }

  void ntt_forward_inplace() {
    require(Domain::Coeff, "forward NTT");
    for (std::size_t i = 0; i < num_moduli(); ++i) ring_->ntt(i).forward(residue(i));
    dom_ = Domain::Eval;
  }
  void ntt_inverse_inplace() {
    require(Domain::Eval, "inverse NTT");
    for (std::size_t i = 0; i < num_moduli(); ++i) ring_->ntt(i).inverse(residue(i));
    dom_ = Domain::Coeff;
  }

  RnsPoly& operator+=(const RnsPoly& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < num_moduli(); ++i) {
      const Modulus& m = ring_->modulus(i);
      auto a = residue(i);
      auto b = o.residue(i);
      for (std::size_t j = 0; j < a.size(); ++j) a[j] = m.add(a[j], b[j]);
    }
    return *this;
  }
  RnsPoly& operator-=(const RnsPoly& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < num_moduli(); ++i) {
      const Modulus& m = ring_->modulus(i);
      auto a = residue(i);
      auto b = o.residue(i);
      for (std::size_t j = 0; j < a.size(); ++j) a[j] = m.sub(a[j], b[j]);
    }
    return *this;
  }
  /// Pointwise product; both operands must be in the Eval domain.
  RnsPoly& operator*=(const RnsPoly& o) {
    check_compatible(o);
    require(Domain::Eval, "pointwise multiplication");
    for (std::size_t i = 0; i < num_moduli(); ++i) {
      const Modulus& m = ring_->modulus(i);
      auto a = residue(i);
      auto b = o.residue(i);
      for (std::size_t j = 0; j < a.size(); ++j) a[j] = m.mul(a[j], b[j]);
    }
    return *this;
  }
  /// this += a * b (pointwise, Eval domain).
  void mul_add(const RnsPoly& a, const RnsPoly& b) {
    check_compatible(a);
    check_compatible(b);
    require(Domain::Eval, "multiply-accumulate");
    for (std::size_t i = 0; i < num_moduli(); ++i) {
      const Modulus& m = ring_->modulus(i);
      auto d = residue(i);
      auto x = a.residue(i);
      auto y = b.residue(i);
      for (std::size_t j = 0; j < d.size(); ++j) d[j] = m.add(d[j], m.mul(x[j], y[j]));
    }
  }
  RnsPoly& negate() {
    for (std::size_t i = 0; i < num_moduli(); ++i) {
      const Modulus& m = ring_->modulus(i);
      for (auto& v : residue(i)) v = m.neg(v);
    }
    return *this;
  }
  /// Multiplication by an integer scalar (any domain), reduced per residue.
  RnsPoly& scale(u128 c) {
    for (std::size_t i = 0; i < num_moduli(); ++i) {
      const Modulus& m = ring_->modulus(i);
      std::uint32_t s = m.reduce128(c);
      std::uint64_t ss = m.shoup(s);
      for (auto& v : residue(i)) v = m.mul_shoup(v, s, ss);
    }
    return *this;
  }

  friend RnsPoly operator+(RnsPoly a, const RnsPoly& b) { return a += b; }
  friend RnsPoly operator-(RnsPoly a, const RnsPoly& b) { return a -= b; }
  friend RnsPoly operator*(RnsPoly a, const RnsPoly& b) { return a *= b; }
  friend bool operator==(const RnsPoly& a, const RnsPoly& b) {
    return a.dom_ == b.dom_ && a.data_ == b.data_ &&
           (a.ring_ == b.ring_ || (a.ring_ && b.ring_ && a.ring_->same_ring(*b.ring_)));
  }

  void require(Domain d, const char* what) const {
    if (dom_ != d)
      throw UsageError(std::string(what) + " requires the " +
                       (d == Domain::Coeff ? "Coeff" : "Eval") + " domain");
  }
  void check_compatible(const RnsPoly& o) const {
    if (!ring_ || !o.ring_) throw UsageError("operation on an empty polynomial");
    if (ring_ != o.ring_ && !ring_->same_ring(*o.ring_))
      throw UsageError("operands belong to different rings");
    if (dom_ != o.dom_) throw UsageError("operand domain mismatch");
  }

 private:
  RingPtr ring_;
  Domain dom_ = Domain::Coeff;
  std::vector<std::uint32_t> data_;
};

inline RnsPoly ntt_forward(RnsPoly p) {
  p.ntt_forward_inplace();
  return p;
}
inline RnsPoly ntt_inverse(RnsPoly p) {
  p.ntt_inverse_inplace();
  return p;
}

inline RnsPoly poly_add(const RnsPoly& a, const RnsPoly& b) { return a + b; }
inline RnsPoly poly_sub(const RnsPoly& a, const RnsPoly& b) { return a - b; }
inline RnsPoly poly_pointwise_mul(const RnsPoly& a, const RnsPoly& b) { return a * b; }
inline RnsPoly poly_scalar_mul(RnsPoly a, u128 c) { return std::move(a.scale(c)); }

/// Residues of every coefficient: residues[i][j] = coeffs[j] mod q_i.
inline RnsPoly crt_decompose(const BigCoeffPoly& p, const RingPtr& ring) {
  const std::uint32_t n = ring->degree();
  if (p.coeffs.size() != n) throw UsageError("coefficient count must equal N");
  RnsPoly out(ring, Domain::Coeff);
  const u128 q = ring->q();
  for (std::uint32_t j = 0; j < n; ++j)
    if (p.coeffs[j] >= q) throw DomainError("coefficient is not below Q");
  for (std::size_t i = 0; i < ring->num_moduli(); ++i) {
    const Modulus& m = ring->modulus(i);
    auto r = out.residue(i);
    for (std::uint32_t j = 0; j < n; ++j) r[j] = m.reduce128(p.coeffs[j]);
  }
  return out;
}

/// Reconstructs coefficient j as sum_i ([c]_qi * (Q/qi)^-1 mod qi) * (Q/qi) mod Q.
inline u128 icrt_coefficient(const RnsPoly& p, std::uint32_t j) {
  const RingContext& ring = *p.ring();
  const std::size_t k = ring.num_moduli();
  const u128 q = ring.q();
  u128 acc = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const Modulus& m = ring.modulus(i);
    std::uint32_t y = m.mul_shoup(p.at(i, j), ring.q_hat_inv(i), ring.q_hat_inv_shoup(i));
    acc += u128{y} * ring.q_hat(i);  // each term < Q, sum < K*Q < 2^114
  }
  while (acc >= q) acc -= q;
  return acc;
}

inline BigCoeffPoly icrt_reconstruct(const RnsPoly& p) {
  p.require(Domain::Coeff, "iCRT");
  BigCoeffPoly out;
  out.coeffs.resize(p.degree());
  for (std::uint32_t j = 0; j < p.degree(); ++j) out.coeffs[j] = icrt_coefficient(p, j);
  return out;
}

/// p * X^t in R_Q for any signed t (X^N = -1).
inline RnsPoly monomial_mul(const RnsPoly& p, std::int64_t t) {
  const RingContext& ring = *p.ring();
  const std::uint32_t n = ring.degree();
  const std::int64_t two_n = 2 * std::int64_t{n};
  std::int64_t e = ((t % two_n) + two_n) % two_n;
  RnsPoly out(p.ring(), p.domain());
  for (std::size_t i = 0; i < ring.num_moduli(); ++i) {
    const Modulus& m = ring.modulus(i);
    auto src = p.residue(i);
    auto dst = out.residue(i);
    if (p.domain() == Domain::Coeff) {
      for (std::uint32_t j = 0; j < n; ++j) {
        std::uint64_t k = (j + static_cast<std::uint64_t>(e)) % (2ull * n);
        if (k < n) dst[k] = src[j];
        else dst[k - n] = m.neg(src[j]);
      }
    } else {
      for (std::uint32_t s = 0; s < n; ++s) {
        std::uint64_t exp = std::uint64_t{ring.ntt(i).slot_exponent(s)} * static_cast<std::uint64_t>(e);
        dst[s] = m.mul(src[s], ring.psi_power(i, exp));
      }
    }
  }
  return out;
}

/// p(X^r) for odd r. In the Coeff domain coefficient j moves to j*r mod 2N
/// with a sign flip past N; in the Eval domain the slots are permuted.
inline RnsPoly automorphism_map(const RnsPoly& p, std::uint64_t r) {
  if (r % 2 == 0) throw UsageError("automorphism exponent must be odd");
  const RingContext& ring = *p.ring();
  const std::uint32_t n = ring.degree();
  const std::uint64_t two_n = 2ull * n;
  r %= two_n;
  RnsPoly out(p.ring(), p.domain());
  if (p.domain() == Domain::Coeff) {
    for (std::size_t i = 0; i < ring.num_moduli(); ++i) {
      const Modulus& m = ring.modulus(i);
      auto src = p.residue(i);
      auto dst = out.residue(i);
      for (std::uint32_t j = 0; j < n; ++j) {
        std::uint64_t k = (j * r) % two_n;
        if (k < n) dst[k] = src[j];
        else dst[k - n] = m.neg(src[j]);
      }
    }
  } else {
    // aut(p)(psi^e) = p(psi^(e*r)).
    std::vector<std::uint32_t> perm(n);
    for (std::uint32_t s = 0; s < n; ++s)
      perm[s] = ring.slot_of_exponent(std::uint64_t{ring.ntt(0).slot_exponent(s)} * r);
    for (std::size_t i = 0; i < ring.num_moduli(); ++i) {
      auto src = p.residue(i);
      auto dst = out.residue(i);
      for (std::uint32_t s = 0; s < n; ++s) dst[s] = src[perm[s]];
    }
  }
  return out;
}

/// Serialized as one domain byte (0 = Coeff, 1 = Eval) followed by every
/// residue word as little-endian u32, residue-major.
inline void write_poly(ByteWriter& w, const RnsPoly& p) {
  w.u8(static_cast<std::uint8_t>(p.domain()));
  w.words(p.words());
}

inline RnsPoly read_poly(ByteReader& r, const RingPtr& ring) {
  std::uint8_t d = r.u8();
  if (d > 1) throw FormatError("bad polynomial domain flag");
  RnsPoly p(ring, static_cast<Domain>(d));
  r.words(p.words());
  for (std::size_t i = 0; i < ring->num_moduli(); ++i) {
    const std::uint32_t q = ring->modulus(i).value();
    for (auto v : p.residue(i))
      if (v >= q) throw FormatError("residue word not reduced");
  }
  return p;
}

inline std::size_t serialized_poly_size(const RingContext& ring) {
  return 1 + 4 * ring.num_moduli() * ring.degree();
}

}  // namespace ive
