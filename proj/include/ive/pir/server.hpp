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

#include "ive/common/parallel.hpp"
#include "ive/pir/coltor.hpp"
#include "ive/pir/database.hpp"
#include "ive/pir/expand.hpp"
#include "ive/pir/rowsel.hpp"

namespace ive {

template <typename F>
auto run_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

/// ExpandQuery, RowSel over the image rows, then ColTor over the selectors
/// belonging to those rows. For a full image this is the complete answer.
inline PirResponse answer_query(const DatabaseImage& db, const PirQuery& q, const KeyBundle& keys,
                                OpTrace* trace = nullptr, std::size_t width = default_parallelism()) {
  const PirParams& params = db.params();
  if (!db.is_full()) throw UsageError("answer_query needs the full image");
  auto ex = run_stage("expand", [&] { return expand_query(q, keys, params, trace); });
  auto rows = run_stage("rowsel", [&] { return row_sel_gemm(db, ex.columns, nullptr, width); });
  if (trace) trace->plain_mul += std::uint64_t{params.d0()} * db.row_count();
  return run_stage("coltor", [&] { return PirResponse{col_tor(std::move(rows), ex.selectors, params, 0, trace)}; });
}

struct BatchItem {
  const PirQuery* query;
  const KeyBundle* keys;
};

/// Expansion per query, one shared DB scan for every RowSel, ColTor per query.
/// A partial image (worker slice) returns the local tournament winner of its rows.
inline std::vector<PirResponse> answer_batch(const DatabaseImage& db, const std::vector<BatchItem>& items,
                                             ScanCounters* counters = nullptr,
                                             std::size_t width = default_parallelism()) {
  const PirParams& params = db.params();
  const std::size_t nq = items.size();
  if (!std::has_single_bit(db.row_count())) throw UsageError("row range must be a power of two");
  if (db.row_begin() % db.row_count() != 0)
    throw UsageError("row range is not aligned to a tournament subtree");

  std::vector<ExpandedQuery> ex(nq);
  run_stage("expand", [&] {
    parallel_for(nq, width, [&](std::size_t i) { ex[i] = expand_query(*items[i].query, *items[i].keys, params); });
    return 0;
  });
  std::vector<const std::vector<BfvCiphertext>*> cols;
  for (auto& e : ex) cols.push_back(&e.columns);
  auto rows = run_stage("rowsel", [&] { return row_sel_batch(db, cols, counters, width); });
  std::vector<PirResponse> out(nq);
  run_stage("coltor", [&] {
    parallel_for(nq, width, [&](std::size_t i) {
      out[i] = PirResponse{col_tor(std::move(rows[i]), ex[i].selectors, params, 0)};
    });
    return 0;
  });
  return out;
}

/// A worker's contribution: local RowSel over its slice, then ColTor over the
/// first d_local dimensions, yielding one ciphertext.
inline BfvCiphertext worker_answer_partial(const DatabaseImage& slice, const PirQuery& q,
                                           const KeyBundle& keys, std::size_t width = default_parallelism()) {
  return answer_batch(slice, {{&q, &keys}}, nullptr, width)[0].ct;
}

/// The last log2(W) ColTor levels over partials ordered by worker row range.
inline PirResponse coordinator_finalize(std::vector<BfvCiphertext> partials,
                                        const std::vector<RgswCiphertext>& selectors,
                                        const PirParams& params) {
  if (!std::has_single_bit(partials.size())) throw UsageError("worker count must be a power of two");
  const std::size_t top = std::countr_zero(partials.size());
  if (top > params.d()) throw UsageError("more workers than rows");
  return PirResponse{col_tor(std::move(partials), selectors, params, params.d() - top)};
}

}  // namespace ive
