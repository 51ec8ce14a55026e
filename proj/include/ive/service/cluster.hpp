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

#include "ive/pir/database.hpp"

namespace ive::service {

struct RowRange {
  std::uint64_t begin = 0;
  std::uint64_t count = 0;
};

/// Record-level partition of the 2^d row grid over W workers.
struct ClusterPlan {
  std::uint32_t workers = 1;
  std::uint32_t d = 0;
  std::uint32_t d_local = 0;
  std::vector<RowRange> ranges;

  std::uint32_t top_levels() const { return d - d_local; }
};

inline ClusterPlan rlp_partition(const PirParams& params, std::uint32_t workers) {
  if (workers == 0 || !std::has_single_bit(workers))
    throw UsageError("worker count must be a power of two, got " + std::to_string(workers));
  const std::uint64_t rows = params.rows();
  if (workers > rows)
    throw UsageError("worker count " + std::to_string(workers) + " exceeds the " + std::to_string(rows) + " rows");
  ClusterPlan p;
  p.workers = workers;
  p.d = params.d();
  p.d_local = params.d() - static_cast<std::uint32_t>(std::countr_zero(workers));
  const std::uint64_t per = rows / workers;
  for (std::uint32_t w = 0; w < workers; ++w) p.ranges.push_back({w * per, per});
  return p;
}

/// Throws unless `slice` is exactly worker `w`'s range of `plan`.
inline void check_slice(const ClusterPlan& plan, std::uint32_t w, const DatabaseImage& slice) {
  if (w >= plan.workers) throw UsageError("worker index outside the plan");
  const RowRange& r = plan.ranges[w];
  if (slice.row_begin() != r.begin || slice.row_count() != r.count)
    throw UsageError("slice rows [" + std::to_string(slice.row_begin()) + ", +" + std::to_string(slice.row_count()) +
                     ") do not match worker " + std::to_string(w) + " of the plan");
}

}  // namespace ive::service
