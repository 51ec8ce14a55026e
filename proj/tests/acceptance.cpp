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


// Acceptance run: one PASS/FAIL line per criterion. Optional arguments pick
// criteria by number (e.g. "acceptance 1 6").

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ive/pir/client.hpp"
#include "ive/pir/server.hpp"
#include "ive/sched/report.hpp"
#include "ive/service/client.hpp"
#include "ive/service/load.hpp"
#include "ive/service/server.hpp"

namespace ive {
namespace {

using boost::multiprecision::cpp_int;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

ParamsPtr test_params(std::uint32_t d0, std::uint32_t d, double sigma = 3.2) {
  ParamOverrides o;
  o.d0 = d0;
  o.d = d;
  o.sigma = sigma;
  return PirParams::profile("test", o);
}

std::vector<Bytes> records_for(const PirParams& params, std::uint64_t seed) {
  std::vector<Bytes> recs(params.total_polys(), Bytes(params.poly_payload_bytes()));
  for (std::uint64_t i = 0; i < recs.size(); ++i) synthetic_record(seed, i, recs[i]);
  return recs;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

cpp_int big(u128 x) {
  cpp_int r = static_cast<std::uint64_t>(x >> 64);
  r <<= 64;
  r += static_cast<std::uint64_t>(x);
  return r;
}

// 1. NTT products against a schoolbook negacyclic product, and CRT round trips.
Outcome ring_math() {
  auto t0 = Clock::now();
  auto params = test_params(4, 0);
  const RingPtr& ring = params->ring();
  const std::size_t n = ring->degree();
  Prng rng(101);
  int bad_products = 0;
  for (int trial = 0; trial < 100; ++trial) {
    RnsPoly a(ring, Domain::Coeff), b(ring, Domain::Coeff);
    for (std::size_t i = 0; i < ring->num_moduli(); ++i) {
      const std::uint64_t q = ring->modulus(i).value();
      for (auto& v : a.residue(i)) v = static_cast<std::uint32_t>(rng.uniform(q));
      for (auto& v : b.residue(i)) v = static_cast<std::uint32_t>(rng.uniform(q));
    }
    auto c = ntt_inverse(ntt_forward(a) * ntt_forward(b));
    for (std::size_t i = 0; i < ring->num_moduli(); ++i) {
      const std::uint64_t q = ring->modulus(i).value();
      auto ra = a.residue(i), rb = b.residue(i);
      std::vector<std::uint64_t> want(n, 0);
      for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = 0; y < n; ++y) {
          std::uint64_t prod = std::uint64_t{ra[x]} * rb[y] % q;
          std::size_t k = x + y;
          if (k < n) want[k] = (want[k] + prod) % q;
          else want[k - n] = (want[k - n] + q - prod) % q;
        }
      }
      for (std::size_t j = 0; j < n; ++j)
        if (c.at(i, j) != want[j]) {
          ++bad_products;
          break;
        }
    }
  }
  cpp_int qbig = 1;
  for (std::size_t i = 0; i < ring->num_moduli(); ++i) qbig *= ring->modulus(i).value();
  int bad_crt = 0, checked = 0;
  while (checked < 10000) {
    BigCoeffPoly p{std::vector<u128>(n)};
    for (auto& v : p.coeffs) {
      cpp_int r = (cpp_int(rng.next_u64()) << 64 | cpp_int(rng.next_u64())) % qbig;
      v = (u128(static_cast<std::uint64_t>(r >> 64)) << 64) | static_cast<std::uint64_t>(r & UINT64_MAX);
    }
    auto rns = crt_decompose(p, ring);
    for (std::uint32_t j = 0; j < n && checked < 10000; ++j, ++checked) {
      bool ok = icrt_coefficient(rns, j) == p.coeffs[j];
      for (std::size_t i = 0; i < ring->num_moduli(); ++i)
        ok = ok && cpp_int(rns.at(i, j)) == big(p.coeffs[j]) % ring->modulus(i).value();
      if (!ok) ++bad_crt;
    }
  }
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {bad_products == 0 && bad_crt == 0 && secs < 60,
          fmt("100 products x %zu moduli, %d mismatched; %d CRT round trips, %d mismatched; %.1f s",
              ring->num_moduli(), bad_products, checked, bad_crt, secs)};
}

// 2. Test profile, D0 = 256, d = 4, 100 random indices.
Outcome end_to_end() {
  auto params = test_params(256, 4);
  auto recs = records_for(*params, 202);
  auto db = preprocess_db(params, recs, params->poly_payload_bytes());
  PirClient client(params, 202);
  auto kb = client.bundle();
  Prng pick(203);
  int exact = 0, positive = 0;
  double min_budget = 1e9;
  for (int t = 0; t < 100; ++t) {
    std::uint64_t idx = pick.uniform(recs.size());
    auto [q, loc] = client.query_record(idx, params->poly_payload_bytes());
    auto got = client.decode(answer_query(db, q, kb), loc);
    exact += got.bytes == recs[idx];
    positive += got.budget.bits > 0 && !got.exhausted;
    min_budget = std::min(min_budget, got.budget.bits);
  }
  return {exact == 100 && positive == 100,
          fmt("%d/100 exact, %d/100 with budget > 0, min budget %.2f bits", exact, positive, min_budget)};
}

// Mean square of the centered phase error over all coefficients.
double mean_square_error(const SecretKey& sk, const BfvCiphertext& ct, const PirParams& params) {
  auto ph = decrypt_phase(sk, ct);
  const u128 q = params.q();
  double acc = 0;
  for (auto x : ph.coeffs) {
    u128 dm = params.delta() * round_to_plaintext(x, params) % q;
    auto [mag, neg] = centered(x >= dm ? x - dm : x + (q - dm), q);
    double e = double(mag);
    acc += e * e;
  }
  return acc / double(ph.coeffs.size());
}

// 3. Noise of the tournament winner after t = 2..10 levels of one d = 10
// query, so every depth shares the same expansion and RowSel rows.
Outcome noise_scaling() {
  constexpr double kResidualLimit = 0.20;
  constexpr double kCurvatureLimit = 0.20;
  constexpr std::uint32_t kDepth = 10;
  constexpr int kQueries = 3;
  auto params = test_params(4, kDepth);
  auto db = preprocess_db(params, records_for(*params, 300), params->poly_payload_bytes());
  PirClient client(params, 300);
  auto kb = client.bundle();
  Prng pick(301);
  std::vector<double> ds, ms(kDepth + 1, 0.0);
  for (int qn = 0; qn < kQueries; ++qn) {
    const std::uint64_t idx = pick.uniform(params->total_polys());
    auto ex = expand_query(client.query_poly(idx), kb, *params);
    auto rows = row_sel_gemm(db, ex.columns, nullptr, 1);
    const std::uint64_t row = idx / params->d0();
    for (std::uint32_t t = 0;; ++t) {
      ms[t] += mean_square_error(client.keys().sk, rows[row >> t], *params) / kQueries;
      if (t == kDepth) break;
      std::vector<BfvCiphertext> next;
      for (std::size_t k = 0; k < rows.size(); k += 2) next.push_back(cmux(ex.selectors[t], rows[k], rows[k + 1], *params));
      rows = std::move(next);
    }
  }
  ms.erase(ms.begin(), ms.begin() + 2);
  for (std::uint32_t t = 2; t <= kDepth; ++t) ds.push_back(t);
  const double k = double(ds.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    sx += ds[i];
    sy += ms[i];
    sxx += ds[i] * ds[i];
    sxy += ds[i] * ms[i];
  }
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / k;
  const double mean = sy / k;
  double worst = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) worst = std::max(worst, std::abs(ms[i] - (icpt + slope * ds[i])) / mean);
  // Curvature: the second difference of the end and middle points relative to the rise.
  const std::size_t mid = ds.size() / 2;
  const double rise = ms.back() - ms.front();
  const double curvature = (ms.back() + ms.front() - 2 * ms[mid]) / std::max(rise, 1e-300);
  std::string series;
  for (std::size_t i = 0; i < ds.size(); ++i) series += fmt(" t%g=2^%.2f", ds[i], 0.5 * std::log2(ms[i]));
  return {slope > 0 && worst <= kResidualLimit && curvature <= kCurvatureLimit,
          fmt("rms noise by level%s; affine fit of mean square slope %.3g, max residual %.1f%% of mean, curvature %.1f%% of rise",
              series.c_str(), slope, 100 * worst, 100 * curvature)};
}

// 4. Expansion leaves for D0 in {4, 16, 256}, noiseless and noisy.
Outcome expansion() {
  int failures = 0, leaves = 0;
  for (std::uint32_t d0 : {4u, 16u, 256u}) {
    for (double sigma : {0.0, 3.2}) {
      const std::uint32_t d = 2;
      auto params = test_params(d0, d, sigma);
      auto ks = keygen(*params, 400 + d0);
      Prng rng(410 + d0);
      const std::uint64_t target = rng.uniform(params->total_polys());
      auto q = build_query(ks.sk, target, *params, rng);
      auto out = expand_leaves(q.ct, public_bundle(ks), *params);
      auto t = split_index(target, *params);
      BigCoeffPoly zero{std::vector<u128>(params->n(), 0)};
      for (std::uint32_t i = 0; i < d0; ++i, ++leaves) {
        BigCoeffPoly want = zero;
        if (i == t.column) want.coeffs[0] = params->delta();
        if (sigma == 0) {
          failures += raw_error(ks.sk, out[i], want, *params) != 0;
        } else {
          auto dec = decrypt_bfv(ks.sk, out[i], *params);
          bool ok = !dec.exhausted && dec.plaintext.coeffs[0] == (i == t.column ? 1u : 0u);
          for (std::uint32_t j = 1; j < params->n(); ++j) ok = ok && dec.plaintext.coeffs[j] == 0;
          failures += !ok;
        }
      }
      for (std::uint32_t dim = 0; dim < d; ++dim) {
        for (std::uint32_t j = 0; j < params->ell(); ++j, ++leaves) {
          BigCoeffPoly want = zero;
          if (t.bits[dim]) want.coeffs[0] = u128{1} << (params->log2_z() * j);
          u128 err = raw_error(ks.sk, out[d0 + dim * params->ell() + j], want, *params);
          failures += sigma == 0 ? err != 0 : !(log2_u128(err) < log2_u128(params->delta()) - 1);
        }
      }
    }
  }
  return {failures == 0, fmt("%d leaves checked over D0 in {4,16,256} x {noiseless, noisy}, %d wrong", leaves, failures)};
}

// 5. Tournament of depth 3 over every selector pattern.
Outcome coltor_exhaustive() {
  auto params = test_params(4, 3);
  Prng rng(500);
  auto sk = SecretKey::generate(*params, rng);
  std::vector<Plaintext> ms;
  std::vector<BfvCiphertext> cts;
  for (int k = 0; k < 8; ++k) {
    Plaintext m{std::vector<std::uint64_t>(params->n())};
    for (auto& v : m.coeffs) v = rng.uniform(params->p());
    ms.push_back(m);
    cts.push_back(encrypt_bfv(sk, m, *params, rng));
  }
  int correct = 0;
  for (int pattern = 0; pattern < 8; ++pattern) {
    std::vector<RgswCiphertext> sel;
    for (int t = 0; t < 3; ++t) sel.push_back(encrypt_rgsw_int(sk, (pattern >> t) & 1, *params, rng));
    correct += decrypt_bfv(sk, col_tor(cts, sel, *params), *params).plaintext == ms[pattern];
  }
  return {correct == 8, fmt("%d/8 patterns select the right payload", correct)};
}

// 6. Closed form for depths 1..5, then combined-optimization ratios at Table 1 sizes.
Outcome scheduler() {
  using namespace sched;
  SchedConfig cfg;
  cfg.d = SchedConfig::dims_for_db(8.0 * (1ull << 30), cfg.n, cfg.d0, cfg.plaintext_bits);
  MemModel mem = MemModel::from(cfg, 160ull << 20, cfg.batch);
  // The closed form is a pure count; it is checked without a capacity limit.
  MemModel roomy = MemModel::from(cfg, 1e15, 1);
  bool exact = true;
  for (std::uint32_t D = 1; D <= 5; ++D) {
    OpGraph g = build_tree(TreeKind::ColTor, D, 2);
    auto bfs = simulate_traffic(g, {Strategy::BFS, 0}, roomy).totals().category(kCt);
    auto hs = simulate_traffic(g, {Strategy::HS_DFS, D}, roomy).totals().category(kCt);
    std::uint64_t p = std::uint64_t{1} << D;
    exact = exact && hs * (3 * p - 3) == bfs * (p + 1);
  }
  Graphs g = build_graphs(cfg);
  auto reduction = [&](const OpGraph& tree) {
    auto bfs = simulate_traffic(tree, {Strategy::BFS, 0}, mem);
    auto best = simulate_traffic(tree, {Strategy::HS_DFS_RO, 0}, mem);
    return std::pair{double(bfs.total()) / double(best.total()), best.depth};
  };
  auto [ex, ex_depth] = reduction(g.expand);
  auto [col, col_depth] = reduction(g.coltor);
  const double ex_err = std::abs(ex / 1.87 - 1), col_err = std::abs(col / 2.24 - 1);
  return {exact && ex_err <= 0.15 && col_err <= 0.15,
          fmt("closed form depths 1-5 %s; Expand %.3fx at depth %u (target 1.87x, off %.1f%%); "
              "ColTor %.3fx at depth %u (target 2.24x, off %.1f%%)",
              exact ? "exact" : "MISMATCH", ex, ex_depth, 100 * ex_err, col, col_depth, 100 * col_err)};
}

// 7. Shared scan counters for B in {1, 8, 64}.
Outcome amortization() {
  auto params = test_params(16, 2);
  auto db = preprocess_db(params, records_for(*params, 700), params->poly_payload_bytes());
  PirClient client(params, 700);
  auto kb = client.bundle();
  std::vector<PirQuery> qs;
  for (int i = 0; i < 64; ++i) qs.push_back(client.query_poly(i % params->total_polys()));
  bool ok = true;
  double client_ref = 0, worst_dev = 0;
  std::string parts;
  for (std::size_t B : {1u, 8u, 64u}) {
    std::vector<BatchItem> items;
    for (std::size_t i = 0; i < B; ++i) items.push_back({&qs[i], &kb});
    ScanCounters c;
    answer_batch(db, items, &c, 1);
    ok = ok && c.batch == B && c.db_bytes == db.stored_bytes() &&
         c.db_bytes_per_query() == double(db.stored_bytes()) / double(B);
    if (B == 1) client_ref = c.client_bytes_per_query();
    worst_dev = std::max(worst_dev, std::abs(c.client_bytes_per_query() / client_ref - 1));
    parts += fmt(" B=%zu:%.0f", B, c.db_bytes_per_query());
  }
  ok = ok && worst_dev <= 0.01;
  return {ok, fmt("db bytes per query%s (scan %llu); client bytes per query spread %.2f%%", parts.c_str(),
                  static_cast<unsigned long long>(db.stored_bytes()), 100 * worst_dev)};
}

// 8. Poisson load at 0.8 of single-query capacity with the auto window,
// on the first configuration where RowSel is at least half of a query.
Outcome latency_bound() {
  using namespace service;
  struct Shape {
    std::uint32_t d0, d;
  };
  for (Shape s : {Shape{256, 8}, Shape{456, 8}}) {
    auto params = test_params(s.d0, s.d);
    auto db = random_image(params, params->rows(), 800);
    PirClient client(params, 800);
    StageTimes t = measure_stage_times(db, client.query_poly(1), client.bundle(), 4, 2, 1);
    const double share = t.scan / t.single();
    if (share < 0.5) {
      std::printf("  [8] D0=%u d=%u: RowSel share %.2f, trying a larger DB\n", s.d0, s.d, share);
      continue;
    }
    WindowPolicy auto_w;
    auto_w.automatic = true;
    const double window = window_duration(auto_w, db, calibrate_scan(db, 3, 1)).count();
    LoadConfig c;
    c.rate = 0.8 / t.single();
    c.duration = 5000 * t.single();
    c.window = window;
    c.times = t;
    auto r = poisson_load(c);
    double worst_delay = 0;
    for (double q : r.queue_delays) worst_delay = std::max(worst_delay, q);
    return {r.mean <= 2 * t.single() && worst_delay <= window,
            fmt("D0=%u d=%u, RowSel share %.2f, batch increment %.0f%% of a scan, window %.1f ms, %zu requests at load 0.8: "
                "mean %.1f ms = %.2fx single (%.1f ms), max queue delay %.1f ms",
                s.d0, s.d, share, 100 * t.scan_increment / t.scan, 1e3 * window, r.arrivals.size(), 1e3 * r.mean, r.mean / t.single(),
                1e3 * t.single(), 1e3 * worst_delay)};
  }
  return {false, "no tried configuration has RowSel at half of the query time"};
}

// 9. Coordinator with W in {1, 2, 4} in-process workers.
Outcome rlp() {
  using namespace service;
  auto params = test_params(16, 3);
  auto db = std::make_shared<const DatabaseImage>(
      preprocess_db(params, records_for(*params, 900), params->poly_payload_bytes()));
  PirClient pc(params, 900);
  std::vector<PirQuery> qs{pc.query_poly(0), pc.query_poly(77), pc.query_poly(127)};
  auto base = [&](Role role) {
    ServerConfig c;
    c.params = params;
    c.db = db;
    c.window.fixed = Seconds(0);
    c.width = 1;
    c.role = role;
    return c;
  };
  const std::size_t ct_bytes = serialize_ct(BfvCiphertext::zero(params->ring()), *params).size();
  std::vector<std::vector<Bytes>> per_w;
  bool payload_ok = true;
  std::string sizes;
  for (std::uint32_t W : {1u, 2u, 4u}) {
    std::vector<std::unique_ptr<PirServer>> workers;
    ServerConfig coord = base(Role::Coordinator);
    coord.db = nullptr;
    coord.window.fixed = Seconds(30);
    coord.max_batch = qs.size();
    for (std::uint32_t w = 0; w < W; ++w) {
      ServerConfig c = base(Role::Worker);
      c.worker_index = w;
      c.workers = W;
      workers.push_back(std::make_unique<PirServer>(c));
      workers.back()->start();
      coord.peers.push_back({"127.0.0.1", workers.back()->port()});
    }
    PirServer server(coord);
    server.start();
    ServiceClient sc({"127.0.0.1", server.port()}, params);
    sc.upload_keys(1, pc.bundle());
    for (std::size_t i = 0; i < qs.size(); ++i) sc.send_query(1, i, qs[i]);
    std::vector<Bytes> out(qs.size());
    for (std::size_t i = 0; i < qs.size(); ++i) {
      auto [id, r] = sc.recv_response();
      out[id] = serialize_response(r, *params);
    }
    auto st = server.stats();
    payload_ok = payload_ok && st.partial_payload_bytes.size() == W * qs.size();
    for (auto b : st.partial_payload_bytes) payload_ok = payload_ok && b == ct_bytes + 12;
    sizes += fmt(" W=%u:%zu", W, st.partial_payload_bytes.empty() ? 0 : st.partial_payload_bytes[0]);
    per_w.push_back(std::move(out));
    server.stop();
    for (auto& w : workers) w->stop();
  }
  bool identical = per_w[1] == per_w[0] && per_w[2] == per_w[0];
  return {identical && payload_ok,
          fmt("responses %s across W=1,2,4; partial payload bytes%s (ciphertext %zu + 12 header)",
              identical ? "byte-identical" : "DIFFER", sizes.c_str(), ct_bytes)};
}

// 10. 64 MiB of raw records at Table 1 parameters.
Outcome expansion_factor() {
  ParamOverrides o;
  o.d = 4;
  auto params = PirParams::profile("table1", o);
  const std::uint64_t rec = params->poly_payload_bytes();
  const std::uint64_t count = (64ull << 20) / rec;
  if (count != params->total_polys())
    return {false, fmt("64 MiB is %llu records, grid holds %llu", static_cast<unsigned long long>(count),
                       static_cast<unsigned long long>(params->total_polys()))};
  auto db = preprocess_db(params, rec, count, [](std::uint64_t i, std::span<std::uint8_t> out) {
    synthetic_record(1000, i, out);
  });
  const double raw = double(64ull << 20);
  const double logical = db.logical_bytes() / raw;
  return {logical < 3.5, fmt("raw 64 MiB in %llu polynomials; log2(Q)/log2(P) expansion %.3fx; "
                             "stored as 32-bit words %.3fx",
                             static_cast<unsigned long long>(db.poly_count()), logical,
                             double(db.stored_bytes()) / raw)};
}

}  // namespace
}  // namespace ive

int main(int argc, char** argv) {
  using namespace ive;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"ring math oracle", ring_math},
      {"end-to-end retrieval", end_to_end},
      {"noise scaling in d", noise_scaling},
      {"query expansion", expansion},
      {"tournament exhaustive", coltor_exhaustive},
      {"scheduler traffic", scheduler},
      {"batch amortization", amortization},
      {"latency bound", latency_bound},
      {"record-level parallel", rlp},
      {"preprocessing expansion", expansion_factor},
  };
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int num = int(i) + 1;
    if (!pick.empty() && !pick.count(num)) continue;
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%2d] %s %s: %s (%.1f s)\n", num, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
