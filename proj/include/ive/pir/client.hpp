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

#include "ive/crypto/keys.hpp"
#include "ive/pir/database.hpp"
#include "ive/pir/query.hpp"

namespace ive {

struct DecodedRecord {
  Bytes bytes;
  NoiseBudget budget;
  bool exhausted = false;
};

/// Decrypts the response and cuts the record out of the packed payload.
inline DecodedRecord decode_response(const SecretKey& sk, const PirResponse& resp,
                                     const RecordLocator& loc, const PirParams& params) {
  auto dec = decrypt_bfv(sk, resp.ct, params);
  Bytes payload = unpack_payload(dec.plaintext.coeffs, params);
  if (loc.offset + loc.length > payload.size()) throw DomainError("record locator outside the payload");
  DecodedRecord out;
  out.bytes.assign(payload.begin() + static_cast<std::ptrdiff_t>(loc.offset),
                   payload.begin() + static_cast<std::ptrdiff_t>(loc.offset + loc.length));
  out.budget = dec.budget;
  out.exhausted = dec.exhausted;
  return out;
}

class PirClient {
 public:
  PirClient(ParamsPtr params, std::uint64_t seed)
      : params_(std::move(params)), keys_(keygen(*params_, seed)), rng_(seed ^ 0x5eedull) {}
  PirClient(ParamsPtr params, KeySet keys, std::uint64_t query_seed)
      : params_(std::move(params)), keys_(std::move(keys)), rng_(query_seed) {}

  const KeySet& keys() const { return keys_; }
  KeyBundle bundle() const { return public_bundle(keys_); }
  const PirParams& params() const { return *params_; }

  PirQuery query_poly(std::uint64_t poly_index) { return build_query(keys_.sk, poly_index, *params_, rng_); }

  std::pair<PirQuery, RecordLocator> query_record(std::uint64_t record_index, std::uint64_t record_bytes) {
    RecordLocator loc = locate_record(*params_, record_bytes, record_index);
    return {query_poly(loc.poly), loc};
  }

  DecodedRecord decode(const PirResponse& resp, const RecordLocator& loc) const {
    return decode_response(keys_.sk, resp, loc, *params_);
  }

 private:
  ParamsPtr params_;
  KeySet keys_;
  Prng rng_;
};

}  // namespace ive
