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
#include <bit>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ive/common/bytes.hpp"
#include "ive/common/error.hpp"
#include "ive/modring/ring.hpp"

namespace ive {

/// q_k = 2^27 + 2^k + 1 for k in {15, 17, 21, 22}.
inline std::vector<std::uint32_t> default_moduli() {
  std::vector<std::uint32_t> v;
  for (int k : {15, 17, 21, 22}) v.push_back((1u << 27) + (1u << k) + 1u);
  return v;
}

/// Knobs a caller may override on top of a named profile.
struct ParamOverrides {
  std::optional<std::uint32_t> n;
  std::optional<std::uint32_t> num_moduli;
  std::optional<std::uint32_t> d0;
  std::optional<std::uint32_t> d;
  std::optional<std::uint32_t> log2_z;
  std::optional<std::uint32_t> ell;
  std::optional<std::uint32_t> log2_p;
  std::optional<double> sigma;
};

/// Protocol constants plus derived quantities. Construct through make();
/// a constructed object always satisfies every invariant.
class PirParams {
 public:
  struct Spec {
    std::string profile = "custom";
    std::uint32_t n = 4096;
    std::vector<std::uint32_t> moduli = default_moduli();
    std::uint32_t log2_p = 32;
    std::uint32_t d0 = 256;
    std::uint32_t d = 8;
    std::uint32_t log2_z = 14;
    std::uint32_t ell = 8;
    double sigma = 3.2;
  };

  static std::shared_ptr<const PirParams> make(const Spec& s) {
    return std::shared_ptr<const PirParams>(new PirParams(s));
  }

  static Spec profile_spec(const std::string& name) {
    Spec s;
    if (name == "table1") {
      s.profile = "table1";
    } else if (name == "test") {
      s.profile = "test";
      s.n = 1024;
      s.moduli.resize(3);
      s.log2_p = 16;
      s.d0 = 256;
      s.d = 4;
      s.log2_z = 12;
      s.ell = 7;
    } else {
      throw ConfigError("unknown parameter profile '" + name + "'");
    }
    return s;
  }

  static void apply(Spec& s, const ParamOverrides& o) {
    if (o.n) s.n = *o.n;
    if (o.num_moduli) {
      auto all = default_moduli();
      if (*o.num_moduli == 0 || *o.num_moduli > all.size())
        throw ConfigError("moduli count must be between 1 and 4");
      all.resize(*o.num_moduli);
      s.moduli = all;
    }
    if (o.d0) s.d0 = *o.d0;
    if (o.d) s.d = *o.d;
    if (o.log2_z) s.log2_z = *o.log2_z;
    if (o.ell) s.ell = *o.ell;
    if (o.log2_p) s.log2_p = *o.log2_p;
    if (o.sigma) s.sigma = *o.sigma;
  }

  static std::shared_ptr<const PirParams> profile(const std::string& name,
                                                  const ParamOverrides& o = {}) {
    Spec s = profile_spec(name);
    apply(s, o);
    return make(s);
  }

  const Spec& spec() const { return spec_; }
  const std::string& profile_name() const { return spec_.profile; }
  const RingPtr& ring() const { return ring_; }
  std::uint32_t n() const { return spec_.n; }
  std::size_t num_moduli() const { return spec_.moduli.size(); }
  u128 q() const { return ring_->q(); }
  double log2_q() const { return ring_->log2_q(); }
  std::uint32_t log2_p() const { return spec_.log2_p; }
  std::uint64_t p() const { return std::uint64_t{1} << spec_.log2_p; }
  std::uint32_t d0() const { return spec_.d0; }
  std::uint32_t d() const { return spec_.d; }
  std::uint64_t rows() const { return std::uint64_t{1} << spec_.d; }
  /// Total record-polynomial count D = D0 * 2^d.
  std::uint64_t total_polys() const { return std::uint64_t{spec_.d0} << spec_.d; }
  std::uint32_t log2_z() const { return spec_.log2_z; }
  std::uint64_t z() const { return std::uint64_t{1} << spec_.log2_z; }
  std::uint32_t ell() const { return spec_.ell; }
  double sigma() const { return spec_.sigma; }
  /// Expansion depth m = ceil(log2(D0 + d*ell)).
  std::uint32_t m() const { return m_; }
  std::uint32_t consumed_leaves() const { return spec_.d0 + spec_.d * spec_.ell; }
  /// Delta = floor(Q / P).
  u128 delta() const { return ring_->q() / p(); }
  /// Bytes carried by one plaintext polynomial.
  std::uint64_t poly_payload_bytes() const { return std::uint64_t{spec_.n} * spec_.log2_p / 8; }
  /// Automorphism exponents r_t = N/2^t + 1 for t = 0..m-1.
  std::vector<std::uint64_t> expansion_exponents() const {
    std::vector<std::uint64_t> r;
    for (std::uint32_t t = 0; t < m_; ++t) r.push_back((std::uint64_t{spec_.n} >> t) + 1);
    return r;
  }
  const Digest& digest() const { return digest_; }

  /// Canonical description hashed into the parameter digest.
  Bytes encode() const {
    ByteWriter w;
    w.raw(std::string_view("ive.params.v1"));
    w.u8(static_cast<std::uint8_t>(spec_.profile.size()));
    w.raw(spec_.profile);
    w.u32(spec_.n);
    w.u8(static_cast<std::uint8_t>(spec_.moduli.size()));
    for (auto q : spec_.moduli) w.u32(q);
    w.u32(spec_.log2_p);
    w.u32(spec_.d0);
    w.u32(spec_.d);
    w.u32(spec_.log2_z);
    w.u32(spec_.ell);
    w.u64(std::bit_cast<std::uint64_t>(spec_.sigma));
    return w.take();
  }

  std::string describe() const {
    std::string s = "profile=" + spec_.profile + " N=" + std::to_string(spec_.n) + " K=" +
                    std::to_string(spec_.moduli.size()) + " logQ=" +
                    std::to_string(log2_q()) + " P=2^" + std::to_string(spec_.log2_p) +
                    " D0=" + std::to_string(spec_.d0) + " d=" + std::to_string(spec_.d) +
                    " z=2^" + std::to_string(spec_.log2_z) + " ell=" + std::to_string(spec_.ell) +
                    " m=" + std::to_string(m_);
    return s;
  }

 private:
  explicit PirParams(const Spec& s) : spec_(s) {
    if (s.profile.size() > 255) throw ConfigError("profile name too long");
    ring_ = std::make_shared<const RingContext>(s.n, s.moduli);
    if (s.log2_p == 0 || s.log2_p > 32 || s.log2_p % 8 != 0)
      throw ConfigError("P must be 2^8, 2^16, 2^24 or 2^32");
    if (s.d0 == 0) throw ConfigError("D0 must be positive");
    if (s.d > 40) throw ConfigError("d too large");
    if (s.ell == 0) throw ConfigError("ell must be positive");
    if (s.log2_z == 0) throw ConfigError("z must be at least 2");
    std::uint32_t min_q = *std::min_element(s.moduli.begin(), s.moduli.end());
    if ((std::uint64_t{1} << s.log2_z) > min_q)
      throw ConfigError("gadget base z must not exceed the smallest modulus");
    if (std::uint64_t{s.log2_z} * s.ell < 128) {
      u128 zl = u128{1} << (s.log2_z * s.ell);
      if (zl < ring_->q()) throw ConfigError("z^ell must be at least Q");
    }
    std::uint64_t slots = std::uint64_t{s.d0} + std::uint64_t{s.d} * s.ell;
    if (slots > s.n) throw ConfigError("D0 + d*ell query slots exceed N");
    m_ = static_cast<std::uint32_t>(std::bit_width(slots - 1));
    if (slots == 1) m_ = 0;
    if (!(s.sigma >= 0)) throw ConfigError("sigma must be non-negative");
    digest_ = sha256(encode());
  }

  Spec spec_;
  RingPtr ring_;
  std::uint32_t m_ = 0;
  Digest digest_{};
};

using ParamsPtr = std::shared_ptr<const PirParams>;

}  // namespace ive
