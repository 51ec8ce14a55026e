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
#include <functional>
#include <string>
#include <vector>

#include "ive/common/bytes.hpp"
#include "ive/common/parallel.hpp"
#include "ive/common/prng.hpp"
#include "ive/modring/params.hpp"

namespace ive {

/// Where a record lives: polynomial index p (row p / D0, column p % D0) and
/// byte offset inside the polynomial's payload.
struct RecordLocator {
  std::uint64_t poly = 0;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  std::uint64_t row(std::uint32_t d0) const { return poly / d0; }
  std::uint64_t col(std::uint32_t d0) const { return poly % d0; }
};

inline std::uint64_t records_per_poly(const PirParams& params, std::uint64_t record_bytes) {
  if (record_bytes == 0) throw UsageError("record size must be positive");
  std::uint64_t cap = params.poly_payload_bytes();
  if (record_bytes > cap)
    throw DomainError("record of " + std::to_string(record_bytes) +
                      " bytes exceeds one polynomial (" + std::to_string(cap) + " bytes)");
  return cap / record_bytes;
}

inline RecordLocator locate_record(const PirParams& params, std::uint64_t record_bytes,
                                   std::uint64_t index) {
  std::uint64_t rpp = records_per_poly(params, record_bytes);
  RecordLocator loc{index / rpp, (index % rpp) * record_bytes, record_bytes};
  if (loc.poly >= params.total_polys())
    throw DomainError("record index " + std::to_string(index) + " out of range");
  return loc;
}

/// Packs a payload of poly_payload_bytes into N plaintext coefficients:
/// coefficient j is the little-endian word of bytes [jB, (j+1)B), B = log2(P)/8.
inline std::vector<std::uint64_t> pack_payload(std::span<const std::uint8_t> payload,
                                               const PirParams& params) {
  const std::uint32_t width = params.log2_p() / 8;
  std::vector<std::uint64_t> c(params.n(), 0);
  for (std::size_t b = 0; b < payload.size(); ++b)
    c[b / width] |= std::uint64_t{payload[b]} << (8 * (b % width));
  return c;
}

inline Bytes unpack_payload(std::span<const std::uint64_t> coeffs, const PirParams& params) {
  const std::uint32_t width = params.log2_p() / 8;
  Bytes out(std::size_t{params.n()} * width);
  for (std::size_t b = 0; b < out.size(); ++b)
    out[b] = static_cast<std::uint8_t>(coeffs[b / width] >> (8 * (b % width)));
  return out;
}

/// Plaintext over Z_P lifted to the centered range [-P/2, P/2), then CRT and NTT.
inline RnsPoly encode_db_poly(std::span<const std::uint64_t> coeffs, const PirParams& params) {
  const std::int64_t p = static_cast<std::int64_t>(params.p());
  std::vector<std::int64_t> s(params.n());
  for (std::uint32_t j = 0; j < params.n(); ++j) {
    auto v = static_cast<std::int64_t>(coeffs[j]);
    s[j] = v >= p / 2 ? v - p : v;
  }
  return ntt_forward(RnsPoly::from_signed(params.ring(), s));
}

/// The preprocessed (D/D0) x D0 grid, row-major, every polynomial in the Eval domain.
class DatabaseImage {
 public:
  DatabaseImage(ParamsPtr params, std::uint64_t record_bytes, std::uint64_t row_begin,
                std::uint64_t row_count, std::vector<RnsPoly> polys)
      : params_(std::move(params)),
        record_bytes_(record_bytes),
        rpp_(::ive::records_per_poly(*params_, record_bytes)),
        row_begin_(row_begin),
        row_count_(row_count),
        polys_(std::move(polys)) {
    if (polys_.size() != row_count_ * params_->d0()) throw UsageError("grid is not fully populated");
    for (auto& p : polys_)
      if (p.domain() != Domain::Eval) throw UsageError("database polynomials must be in Eval domain");
    digest_ = compute_digest();
  }

  const PirParams& params() const { return *params_; }
  const ParamsPtr& params_ptr() const { return params_; }
  std::uint64_t record_bytes() const { return record_bytes_; }
  std::uint64_t records_per_poly() const { return rpp_; }
  std::uint64_t row_begin() const { return row_begin_; }
  std::uint64_t row_count() const { return row_count_; }
  bool is_full() const { return row_begin_ == 0 && row_count_ == params_->rows(); }
  std::uint64_t poly_count() const { return polys_.size(); }
  std::uint64_t record_capacity() const { return params_->total_polys() * rpp_; }
  /// Polynomial at local row r, column c.
  const RnsPoly& at(std::uint64_t r, std::uint64_t c) const { return polys_[r * params_->d0() + c]; }
  const std::vector<RnsPoly>& polys() const { return polys_; }
  const Digest& digest() const { return digest_; }

  /// Bytes of the preprocessed grid as stored (32-bit words).
  std::uint64_t stored_bytes() const {
    return poly_count() * params_->num_moduli() * params_->n() * 4;
  }
  /// Bytes of the preprocessed grid at the information content of the residues (log2 Q bits per coefficient).
  double logical_bytes() const { return double(poly_count()) * params_->n() * params_->log2_q() / 8; }

  /// Rows [begin, begin + count) of this image, with its own digest.
  DatabaseImage slice(std::uint64_t begin, std::uint64_t count) const {
    if (begin < row_begin_ || begin + count > row_begin_ + row_count_)
      throw UsageError("slice outside the image");
    std::uint64_t lo = (begin - row_begin_) * params_->d0();
    std::vector<RnsPoly> part(polys_.begin() + lo, polys_.begin() + lo + count * params_->d0());
    return DatabaseImage(params_, record_bytes_, begin, count, std::move(part));
  }

  /// Digest over the parameter digest, the shape, and every polynomial word in row-major order.
  static Digest digest_of(const PirParams& params, std::uint64_t record_bytes,
                          const std::vector<const DatabaseImage*>& parts) {
    Sha256 h;
    h.update(params.digest());
    std::uint64_t polys = 0;
    for (auto* p : parts) polys += p->poly_count();
    h.update_u64(polys);
    h.update_u64(record_bytes);
    for (auto* p : parts)
      for (auto& poly : p->polys_) {
        auto w = poly.words();
        h.update({reinterpret_cast<const std::uint8_t*>(w.data()), w.size_bytes()});
      }
    return h.finish();
  }

 private:
  Digest compute_digest() const { return digest_of(*params_, record_bytes_, {this}); }

  ParamsPtr params_;
  std::uint64_t record_bytes_;
  std::uint64_t rpp_;
  std::uint64_t row_begin_;
  std::uint64_t row_count_;
  std::vector<RnsPoly> polys_;
  Digest digest_{};
};

/// Record source: fills `out` (record_bytes long) with record `index`.
using RecordSource = std::function<void(std::uint64_t index, std::span<std::uint8_t> out)>;

/// Packs `num_records` records into the grid; unused slots and polynomials stay zero.
inline DatabaseImage preprocess_db(const ParamsPtr& params, std::uint64_t record_bytes,
                                   std::uint64_t num_records, const RecordSource& source,
                                   std::size_t width = default_parallelism()) {
  const std::uint64_t rpp = records_per_poly(*params, record_bytes);
  const std::uint64_t total = params->total_polys();
  if (num_records > total * rpp)
    throw DomainError(std::to_string(num_records) + " records do not fit " +
                      std::to_string(total) + " polynomials");
  std::vector<RnsPoly> polys(total);
  parallel_for(total, width, [&](std::size_t p) {
    Bytes payload(params->poly_payload_bytes(), 0);
    for (std::uint64_t k = 0; k < rpp; ++k) {
      std::uint64_t idx = p * rpp + k;
      if (idx >= num_records) break;
      source(idx, std::span<std::uint8_t>(payload.data() + k * record_bytes, record_bytes));
    }
    polys[p] = encode_db_poly(pack_payload(payload, *params), *params);
  });
  return DatabaseImage(params, record_bytes, 0, params->rows(), std::move(polys));
}

inline DatabaseImage preprocess_db(const ParamsPtr& params, const std::vector<Bytes>& records,
                                   std::uint64_t record_bytes) {
  for (auto& r : records)
    if (r.size() != record_bytes) throw UsageError("all records must have record_bytes bytes");
  return preprocess_db(params, record_bytes, records.size(),
                       [&](std::uint64_t i, std::span<std::uint8_t> out) {
                         std::copy(records[i].begin(), records[i].end(), out.begin());
                       });
}

/// Deterministic pseudo-random record bytes for seed and index.
inline void synthetic_record(std::uint64_t seed, std::uint64_t index, std::span<std::uint8_t> out) {
  Prng rng(seed ^ (index * 0x9e3779b97f4a7c15ull));
  for (std::size_t i = 0; i < out.size(); i += 8) {
    std::uint64_t v = rng.next_u64();
    for (std::size_t k = 0; k < 8 && i + k < out.size(); ++k)
      out[i + k] = static_cast<std::uint8_t>(v >> (8 * k));
  }
}

inline constexpr char kDbMagic[7] = {'I', 'V', 'E', 'D', 'B', '0', '1'};

/// magic, params digest, D, record_bytes, records_per_poly, row-major
/// polynomials, then the content digest as a trailer.
inline void write_db_stream(std::ostream& out, const DatabaseImage& db) {
  if (!db.is_full()) throw UsageError("only full images are written to disk");
  ByteWriter h;
  h.raw(std::string_view(kDbMagic, 7));
  h.raw(db.params().digest());
  h.u64(db.poly_count());
  h.u64(db.record_bytes());
  h.u64(db.records_per_poly());
  out.write(reinterpret_cast<const char*>(h.bytes().data()), static_cast<std::streamsize>(h.size()));
  for (auto& p : db.polys()) {
    ByteWriter w;
    write_poly(w, p);
    out.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.size()));
  }
  out.write(reinterpret_cast<const char*>(db.digest().data()), 32);
}

inline void write_db_file(const std::string& path, const DatabaseImage& db) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  write_db_stream(out, db);
  if (!out) throw Error("short write to " + path);
}

/// Loads rows [row_begin, row_begin + row_count) of an image file (all rows by default)
/// and verifies the stored content digest over the whole file.
inline DatabaseImage read_db_file(const std::string& path, const ParamsPtr& params,
                                  std::uint64_t row_begin = 0,
                                  std::uint64_t row_count = UINT64_MAX) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  Bytes head(7 + 32 + 24);
  in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
  if (!in) throw FormatError("truncated database header");
  ByteReader r(head);
  auto magic = r.raw(7);
  if (!std::equal(magic.begin(), magic.end(), kDbMagic)) throw FormatError("bad database magic");
  auto dg = r.raw(32);
  if (!std::equal(dg.begin(), dg.end(), params->digest().begin()))
    throw FormatError("parameter digest mismatch");
  std::uint64_t d = r.u64();
  std::uint64_t record_bytes = r.u64();
  std::uint64_t rpp = r.u64();
  if (d != params->total_polys()) throw FormatError("database size does not match D0*2^d");
  if (rpp != records_per_poly(*params, record_bytes)) throw FormatError("inconsistent packing factor");
  if (row_count == UINT64_MAX) row_count = params->rows() - row_begin;
  if (row_begin + row_count > params->rows()) throw UsageError("row range outside the database");

  const std::size_t poly_size = serialized_poly_size(*params->ring());
  Sha256 h;
  h.update(params->digest());
  h.update_u64(d);
  h.update_u64(record_bytes);
  std::vector<RnsPoly> polys;
  Bytes buf(poly_size);
  for (std::uint64_t p = 0; p < d; ++p) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(poly_size));
    if (!in) throw FormatError("truncated database body");
    ByteReader pr(buf);
    RnsPoly poly = read_poly(pr, params->ring());
    if (poly.domain() != Domain::Eval) throw FormatError("database polynomial not in Eval domain");
    auto w = poly.words();
    h.update({reinterpret_cast<const std::uint8_t*>(w.data()), w.size_bytes()});
    std::uint64_t row = p / params->d0();
    if (row >= row_begin && row < row_begin + row_count) polys.push_back(std::move(poly));
  }
  Digest stored{};
  in.read(reinterpret_cast<char*>(stored.data()), 32);
  if (!in) throw FormatError("missing database digest");
  if (h.finish() != stored) throw FormatError("database digest mismatch");
  return DatabaseImage(params, record_bytes, row_begin, row_count, std::move(polys));
}

}  // namespace ive
