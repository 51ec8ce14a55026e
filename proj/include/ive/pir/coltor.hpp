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

#include <bit>
#include <cstdint>
#include <vector>

#include "ive/crypto/rgsw.hpp"
#include "ive/pir/expand.hpp"

namespace ive {

/// Tournament over adjacent pairs (2k, 2k+1): level t uses
/// selectors[first + t] and halves the candidates. Returns the survivor.
inline BfvCiphertext col_tor(std::vector<BfvCiphertext> rows, const std::vector<RgswCiphertext>& selectors,
                             const PirParams& params, std::size_t first = 0, OpTrace* trace = nullptr) {
  if (rows.empty() || !std::has_single_bit(rows.size()))
    throw UsageError("ColTor input length must be a power of two");
  const std::size_t levels = std::countr_zero(rows.size());
  if (first + levels > selectors.size())
    throw UsageError("ColTor needs " + std::to_string(levels) + " selectors from dimension " +
                     std::to_string(first + 1));
  for (std::size_t t = 0; t < levels; ++t) {
    const RgswCiphertext& g = selectors[first + t];
    std::vector<BfvCiphertext> next;
    next.reserve(rows.size() / 2);
    for (std::size_t k = 0; k < rows.size(); k += 2) {
      next.push_back(cmux(g, rows[k], rows[k + 1], params));
      if (trace) {
        trace->ext_prod++;
        trace->ct_add += 2;
      }
    }
    if (trace) trace->level_widths.push_back(static_cast<std::uint32_t>(next.size()));
    rows = std::move(next);
  }
  return std::move(rows[0]);
}

}  // namespace ive
