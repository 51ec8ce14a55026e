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

#include "ive/crypto/container.hpp"
#include "ive/crypto/rgsw.hpp"
#include "ive/pir/query.hpp"

namespace ive {

/// Counts of the homomorphic operations a query execution performed. The
/// server path has no index-dependent branches, so two queries against the
/// same image produce equal traces.
struct OpTrace {
  std::uint64_t subs = 0;
  std::uint64_t ext_prod = 0;
  std::uint64_t monomial = 0;
  std::uint64_t plain_mul = 0;
  std::uint64_t ct_add = 0;
  std::vector<std::uint32_t> level_widths;
  friend bool operator==(const OpTrace&, const OpTrace&) = default;
};

struct ExpandedQuery {
  std::vector<BfvCiphertext> columns;     // D0 one-hot ciphertexts
  std::vector<RgswCiphertext> selectors;  // d selector bits, dimension 1 first
};

inline const EvalKey& find_evk(const KeyBundle& keys, std::uint64_t r) {
  for (auto& k : keys.evks)
    if (k.r == r) return k;
  throw ProtocolError("missing evaluation key for r = " + std::to_string(r));
}

/// All 2^m leaves; leaf k encrypts 2^m times coefficient k of the query.
inline std::vector<BfvCiphertext> expand_leaves(const BfvCiphertext& query, const KeyBundle& keys,
                                                const PirParams& params, OpTrace* trace = nullptr) {
  const std::uint32_t m = params.m();
  std::vector<BfvCiphertext> cur{query};
  for (std::uint32_t t = 0; t < m; ++t) {
    const std::uint64_t r = (std::uint64_t{params.n()} >> t) + 1;
    const EvalKey& evk = find_evk(keys, r);
    const std::int64_t shift = -(std::int64_t{1} << t);
    const std::size_t width = cur.size();
    std::vector<BfvCiphertext> next(2 * width);
    for (std::size_t k = 0; k < width; ++k) {
      BfvCiphertext s = substitute(cur[k], r, evk, params);
      BfvCiphertext diff = cur[k] - s;
      next[k] = cur[k] + s;
      next[k + width] = {monomial_mul(diff.a, shift), monomial_mul(diff.b, shift)};
      if (trace) {
        trace->subs++;
        trace->ct_add += 2;
        trace->monomial++;
      }
    }
    if (trace) trace->level_widths.push_back(static_cast<std::uint32_t>(width));
    cur = std::move(next);
  }
  return cur;
}

/// Rows j < ell are ext(RGSW(-s), leaf_j), rows ell + j are the leaves.
inline RgswCiphertext assemble_rgsw(std::span<const BfvCiphertext> leaves, const KeyBundle& keys,
                                    const PirParams& params, OpTrace* trace = nullptr) {
  RgswCiphertext g;
  for (auto& leaf : leaves) {
    g.rows.push_back(external_product(keys.assembly, leaf, params));
    if (trace) trace->ext_prod++;
  }
  for (auto& leaf : leaves) g.rows.push_back(leaf);
  return g;
}

inline ExpandedQuery expand_query(const PirQuery& q, const KeyBundle& keys, const PirParams& params,
                                  OpTrace* trace = nullptr) {
  if (keys.assembly.rows.size() != 2 * params.ell()) throw ProtocolError("missing assembly key");
  auto leaves = expand_leaves(q.ct, keys, params, trace);
  ExpandedQuery out;
  out.columns.assign(leaves.begin(), leaves.begin() + params.d0());
  for (std::uint32_t t = 0; t < params.d(); ++t) {
    std::size_t first = params.d0() + std::size_t{t} * params.ell();
    out.selectors.push_back(assemble_rgsw(
        std::span<const BfvCiphertext>(leaves.data() + first, params.ell()), keys, params, trace));
  }
  return out;
}

}  // namespace ive
