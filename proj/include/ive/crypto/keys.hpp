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
#include "ive/crypto/rgsw.hpp"

namespace ive {

struct KeySet {
  SecretKey sk;
  std::vector<EvalKey> evks;  // one per expansion level, r = N/2^t + 1
  RgswCiphertext assembly;    // RGSW(-s), turns z^j leaves into s-rows
};

/// Deterministic in (params, seed).
inline KeySet keygen(const PirParams& params, std::uint64_t seed) {
  Prng rng(seed);
  KeySet ks;
  ks.sk = SecretKey::generate(params, rng, seed);
  for (std::uint64_t r : params.expansion_exponents())
    ks.evks.push_back(make_eval_key(ks.sk, r, params, rng));
  RnsPoly minus_s = ks.sk.s;
  minus_s.negate();
  ks.assembly = encrypt_rgsw(ks.sk, minus_s, params, rng);
  return ks;
}

}  // namespace ive
