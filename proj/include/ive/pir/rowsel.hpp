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

#include <atomic>
#include <cstdint>
#include <vector>

#include "ive/common/parallel.hpp"
#include "ive/crypto/bfv.hpp"
#include "ive/pir/database.hpp"
#include "ive/pir/expand.hpp"

namespace ive {

/// Byte counters of one RowSel pass. DB bytes are shared by the whole
/// batch; client bytes are the per-query ciphertext reads and writes.
struct ScanCounters {
  std::uint64_t db_bytes = 0;
  std::uint64_t client_bytes = 0;
  std::uint64_t batch = 0;
  double db_bytes_per_query() const { return batch ? double(db_bytes) / double(batch) : 0; }
  double client_bytes_per_query() const { return batch ? double(client_bytes) / double(batch) : 0; }
};

inline void check_rowsel_input(const DatabaseImage& db, const std::vector<BfvCiphertext>& cts) {
  if (cts.size() != db.params().d0())
    throw UsageError("RowSel needs D0 = " + std::to_string(db.params().d0()) + " ciphertexts, got " +
                     std::to_string(cts.size()));
  for (auto& c : cts)
    if (c.a.domain() != Domain::Eval || c.b.domain() != Domain::Eval)
      throw UsageError("RowSel inputs must be in the Eval domain");
}

/// Ciphertext-at-a-time: row r = sum_i db[r][i] * cts[i].
inline std::vector<BfvCiphertext> row_sel(const DatabaseImage& db, const std::vector<BfvCiphertext>& cts,
                                          OpTrace* trace = nullptr) {
  check_rowsel_input(db, cts);
  const PirParams& params = db.params();
  std::vector<BfvCiphertext> out;
  for (std::uint64_t r = 0; r < db.row_count(); ++r) {
    BfvCiphertext acc = BfvCiphertext::zero(params.ring());
    for (std::uint32_t i = 0; i < params.d0(); ++i) {
      acc.a.mul_add(db.at(r, i), cts[i].a);
      acc.b.mul_add(db.at(r, i), cts[i].b);
      if (trace) trace->plain_mul++;
    }
    out.push_back(std::move(acc));
  }
  return out;
}

/// Per-coefficient GEMM over a batch: for every residue i and coefficient c,
/// out[q][r] = sum_k db[r][k][i][c] * cts[q][k][i][c]. Each DB word is read
/// once per batch and reused by every query. Products are accumulated in
/// 64 bits and reduced every 256 terms.
inline std::vector<std::vector<BfvCiphertext>> row_sel_batch(
    const DatabaseImage& db, const std::vector<const std::vector<BfvCiphertext>*>& batch,
    ScanCounters* counters = nullptr, std::size_t width = default_parallelism()) {
  for (auto* q : batch) check_rowsel_input(db, *q);
  const PirParams& params = db.params();
  const std::uint32_t n = params.n();
  const std::uint32_t d0 = params.d0();
  const std::size_t k_mod = params.num_moduli();
  const std::size_t nq = batch.size();
  const std::uint64_t rows = db.row_count();
  std::vector<std::vector<BfvCiphertext>> out(nq);
  for (auto& o : out)
    for (std::uint64_t r = 0; r < rows; ++r) o.push_back(BfvCiphertext::zero(params.ring()));
  if (nq == 0) return out;

  constexpr std::uint32_t kChunk = 64;
  constexpr std::uint32_t kLazy = 256;
  const std::size_t chunks_per_residue = (n + kChunk - 1) / kChunk;
  std::atomic<std::uint64_t> db_words{0}, client_words{0};
  parallel_for(k_mod * chunks_per_residue, width, [&](std::size_t task) {
    const std::size_t i = task / chunks_per_residue;
    const std::uint32_t c0 = static_cast<std::uint32_t>(task % chunks_per_residue) * kChunk;
    const std::uint32_t len = std::min(kChunk, n - c0);
    const Modulus& m = params.ring()->modulus(i);
    std::vector<std::uint64_t> acc(nq * 2 * kChunk);
    std::uint64_t dbw = 0, clw = 0;
    for (std::uint64_t r = 0; r < rows; ++r) {
      std::fill(acc.begin(), acc.end(), 0);
      for (std::uint32_t k = 0; k < d0; ++k) {
        const std::uint32_t* x = db.at(r, k).residue(i).data() + c0;
        dbw += len;
        for (std::size_t q = 0; q < nq; ++q) {
          const std::uint32_t* a = (*batch[q])[k].a.residue(i).data() + c0;
          const std::uint32_t* b = (*batch[q])[k].b.residue(i).data() + c0;
          std::uint64_t* aa = acc.data() + q * 2 * kChunk;
          std::uint64_t* bb = aa + kChunk;
          for (std::uint32_t c = 0; c < len; ++c) {
            aa[c] += std::uint64_t{x[c]} * a[c];
            bb[c] += std::uint64_t{x[c]} * b[c];
          }
          clw += 2 * len;
        }
        if ((k + 1) % kLazy == 0)
          for (auto& v : acc) v = m.reduce(v);
      }
      for (std::size_t q = 0; q < nq; ++q) {
        std::uint32_t* oa = out[q][r].a.residue(i).data() + c0;
        std::uint32_t* ob = out[q][r].b.residue(i).data() + c0;
        const std::uint64_t* aa = acc.data() + q * 2 * kChunk;
        const std::uint64_t* bb = aa + kChunk;
        for (std::uint32_t c = 0; c < len; ++c) {
          oa[c] = m.reduce(aa[c]);
          ob[c] = m.reduce(bb[c]);
        }
        clw += 2 * len;
      }
    }
    db_words += dbw;
    client_words += clw;
  });
  if (counters) {
    counters->db_bytes += 4 * db_words.load();
    counters->client_bytes += 4 * client_words.load();
    counters->batch += nq;
  }
  return out;
}

inline std::vector<BfvCiphertext> row_sel_gemm(const DatabaseImage& db,
                                               const std::vector<BfvCiphertext>& cts,
                                               ScanCounters* counters = nullptr,
                                               std::size_t width = default_parallelism()) {
  return std::move(row_sel_batch(db, {&cts}, counters, width)[0]);
}

}  // namespace ive
