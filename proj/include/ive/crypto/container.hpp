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

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "ive/common/bytes.hpp"
#include "ive/crypto/keys.hpp"

namespace ive {

/// Object kinds stamped after the parameter digest.
enum class ObjectKind : std::uint8_t {
  Ciphertext = 1,
  Rgsw = 2,
  EvalKey = 3,
  KeyBundle = 4,
  SecretKey = 5,
  Query = 6,
  Response = 7,
};

inline constexpr std::uint8_t kContainerMagic[8] = {'I', 'V', 'E', 'L', 'C', 0, 0, 1};

inline void write_header(ByteWriter& w, const PirParams& params, ObjectKind kind) {
  w.raw(std::span<const std::uint8_t>(kContainerMagic, 8));
  w.raw(params.digest());
  w.u8(static_cast<std::uint8_t>(kind));
}

inline void read_header(ByteReader& r, const PirParams& params, ObjectKind kind) {
  auto magic = r.raw(8);
  if (!std::equal(magic.begin(), magic.end(), kContainerMagic)) throw FormatError("bad container magic");
  auto dg = r.raw(32);
  if (!std::equal(dg.begin(), dg.end(), params.digest().begin()))
    throw FormatError("parameter digest mismatch");
  auto k = r.u8();
  if (k != static_cast<std::uint8_t>(kind))
    throw FormatError("unexpected object kind " + std::to_string(k) + ", wanted " +
                      std::to_string(static_cast<int>(kind)));
}

inline void put_ct(ByteWriter& w, const BfvCiphertext& c) {
  write_poly(w, c.a);
  write_poly(w, c.b);
}
inline BfvCiphertext get_ct(ByteReader& r, const PirParams& params) {
  BfvCiphertext c;
  c.a = read_poly(r, params.ring());
  c.b = read_poly(r, params.ring());
  if (c.a.domain() != c.b.domain()) throw FormatError("ciphertext components differ in domain");
  return c;
}

inline void put_rows(ByteWriter& w, const std::vector<BfvCiphertext>& rows) {
  w.u32(static_cast<std::uint32_t>(rows.size()));
  for (auto& c : rows) put_ct(w, c);
}
inline std::vector<BfvCiphertext> get_rows(ByteReader& r, const PirParams& params,
                                           std::size_t expected) {
  std::uint32_t n = r.u32();
  if (n != expected) throw FormatError("unexpected row count");
  std::vector<BfvCiphertext> rows;
  for (std::uint32_t i = 0; i < n; ++i) rows.push_back(get_ct(r, params));
  return rows;
}

inline void finish(ByteReader& r) {
  if (!r.done()) throw FormatError("trailing bytes after object");
}

inline Bytes serialize_ct(const BfvCiphertext& c, const PirParams& params,
                          ObjectKind kind = ObjectKind::Ciphertext) {
  ByteWriter w;
  write_header(w, params, kind);
  put_ct(w, c);
  return w.take();
}
inline BfvCiphertext deserialize_ct(std::span<const std::uint8_t> b, const PirParams& params,
                                    ObjectKind kind = ObjectKind::Ciphertext) {
  ByteReader r(b);
  read_header(r, params, kind);
  auto c = get_ct(r, params);
  finish(r);
  return c;
}

inline Bytes serialize_rgsw(const RgswCiphertext& g, const PirParams& params) {
  ByteWriter w;
  write_header(w, params, ObjectKind::Rgsw);
  put_rows(w, g.rows);
  return w.take();
}
inline RgswCiphertext deserialize_rgsw(std::span<const std::uint8_t> b, const PirParams& params) {
  ByteReader r(b);
  read_header(r, params, ObjectKind::Rgsw);
  RgswCiphertext g{get_rows(r, params, 2 * params.ell())};
  finish(r);
  return g;
}

inline Bytes serialize_evk(const EvalKey& k, const PirParams& params) {
  ByteWriter w;
  write_header(w, params, ObjectKind::EvalKey);
  w.u64(k.r);
  put_rows(w, k.rows);
  return w.take();
}
inline EvalKey deserialize_evk(std::span<const std::uint8_t> b, const PirParams& params) {
  ByteReader r(b);
  read_header(r, params, ObjectKind::EvalKey);
  EvalKey k;
  k.r = r.u64();
  k.rows = get_rows(r, params, params.ell());
  finish(r);
  return k;
}

/// Public keys a client uploads: the per-level evks and the assembly key.
struct KeyBundle {
  std::vector<EvalKey> evks;
  RgswCiphertext assembly;
  friend bool operator==(const KeyBundle&, const KeyBundle&) = default;
};

inline KeyBundle public_bundle(const KeySet& ks) { return {ks.evks, ks.assembly}; }

inline Bytes serialize_bundle(const KeyBundle& kb, const PirParams& params) {
  ByteWriter w;
  write_header(w, params, ObjectKind::KeyBundle);
  w.u32(static_cast<std::uint32_t>(kb.evks.size()));
  for (auto& k : kb.evks) {
    w.u64(k.r);
    put_rows(w, k.rows);
  }
  put_rows(w, kb.assembly.rows);
  return w.take();
}
inline KeyBundle deserialize_bundle(std::span<const std::uint8_t> b, const PirParams& params) {
  ByteReader r(b);
  read_header(r, params, ObjectKind::KeyBundle);
  KeyBundle kb;
  std::uint32_t n = r.u32();
  if (n > 64) throw FormatError("too many evaluation keys");
  for (std::uint32_t i = 0; i < n; ++i) {
    EvalKey k;
    k.r = r.u64();
    k.rows = get_rows(r, params, params.ell());
    kb.evks.push_back(std::move(k));
  }
  kb.assembly.rows = get_rows(r, params, 2 * params.ell());
  finish(r);
  return kb;
}

inline Bytes serialize_secret(const SecretKey& sk, const PirParams& params) {
  ByteWriter w;
  write_header(w, params, ObjectKind::SecretKey);
  w.u64(sk.seed);
  for (auto c : sk.coeffs) w.u8(static_cast<std::uint8_t>(c));
  return w.take();
}
inline SecretKey deserialize_secret(std::span<const std::uint8_t> b, const PirParams& params) {
  ByteReader r(b);
  read_header(r, params, ObjectKind::SecretKey);
  SecretKey sk;
  sk.seed = r.u64();
  sk.coeffs.resize(params.n());
  std::vector<std::int64_t> c(params.n());
  for (std::uint32_t j = 0; j < params.n(); ++j) {
    sk.coeffs[j] = static_cast<std::int8_t>(r.u8());
    if (sk.coeffs[j] < -1 || sk.coeffs[j] > 1) throw FormatError("secret key is not ternary");
    c[j] = sk.coeffs[j];
  }
  finish(r);
  sk.s = ntt_forward(RnsPoly::from_signed(params.ring(), c));
  return sk;
}

/// Bytes of the object as stored in memory (2 polys per RLWE pair, K*N words each).
inline std::size_t stored_ct_bytes(const PirParams& params) {
  return 2 * params.num_moduli() * params.n() * 4;
}

}  // namespace ive
