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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ive/pir/server.hpp"
#include "ive/service/window.hpp"

namespace ive::service {

/// Measured stage times, in seconds. RowSel over B queries is modeled as
/// scan + (B - 1) * scan_increment.
struct StageTimes {
  double expand = 0;
  double scan = 0;
  double scan_increment = 0;
  double coltor = 0;

  double single() const { return expand + scan + coltor; }
  double batch(std::size_t b) const {
    if (b == 0) return 0;
    return double(b) * (expand + coltor) + scan + double(b - 1) * scan_increment;
  }
};

/// Times each stage of the real pipeline on `db` (best of `repeats`). The
/// RowSel increment comes from a second scan with `probe` copies of the query.
inline StageTimes measure_stage_times(const DatabaseImage& db, const PirQuery& q, const KeyBundle& keys,
                                      std::size_t probe = 4, int repeats = 2, std::size_t width = 1) {
  const PirParams& params = db.params();
  auto best = [&](auto&& fn) {
    double b = 1e300;
    for (int i = 0; i < repeats; ++i) {
      auto t0 = Clock::now();
      fn();
      b = std::min(b, Seconds(Clock::now() - t0).count());
    }
    return b;
  };
  StageTimes t;
  ExpandedQuery ex;
  t.expand = best([&] { ex = expand_query(q, keys, params); });
  t.scan = best([&] { row_sel_batch(db, {&ex.columns}, nullptr, width); });
  std::vector<const std::vector<BfvCiphertext>*> many(probe, &ex.columns);
  double multi = best([&] { row_sel_batch(db, many, nullptr, width); });
  t.scan_increment = probe > 1 ? std::max(0.0, (multi - t.scan) / double(probe - 1)) : 0;
  auto rows = row_sel_batch(db, {&ex.columns}, nullptr, width)[0];
  t.coltor = best([&] { col_tor(rows, ex.selectors, params, 0); });
  return t;
}

struct LoadConfig {
  double rate = 1;       // requests per second
  double duration = 10;  // seconds of arrivals
  std::uint64_t seed = 1;
  double window = 0;     // seconds
  std::size_t max_batch = 64;
  StageTimes times;
};

struct LoadResult {
  std::vector<double> arrivals;
  std::vector<double> latencies;
  std::vector<double> queue_delays;
  std::vector<std::vector<std::size_t>> batches;  // request indices per batch
  double mean = 0;
  double p50 = 0;
  double p99 = 0;
  double throughput = 0;
  double single = 0;
};

inline double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  std::size_t rank = static_cast<std::size_t>(std::ceil(p / 100.0 * double(v.size())));
  return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
}

/// Discrete-event run of the waiting-window server: Poisson arrivals, grid
/// windows closing at the deadline or at max_batch, one batch executing at a
/// time. Same policy as WindowScheduler.
inline LoadResult poisson_load(const LoadConfig& cfg) {
  LoadResult res;
  res.single = cfg.times.single();
  std::mt19937_64 gen(cfg.seed);
  std::exponential_distribution<double> gap(cfg.rate);
  for (double t = gap(gen); t < cfg.duration; t += gap(gen)) res.arrivals.push_back(t);
  const std::size_t n = res.arrivals.size();
  res.latencies.resize(n);
  res.queue_delays.resize(n);

  // Windows in arrival order: members and closing time.
  std::vector<std::pair<std::vector<std::size_t>, double>> windows;
  for (std::size_t i = 0; i < n;) {
    std::vector<std::size_t> members{i};
    double close = res.arrivals[i];
    if (cfg.window > 0) {
      const double deadline = (std::floor(res.arrivals[i] / cfg.window) + 1) * cfg.window;
      close = deadline;
      std::size_t j = i + 1;
      while (j < n && res.arrivals[j] < deadline && members.size() < cfg.max_batch) members.push_back(j++);
      if (members.size() == cfg.max_batch) close = std::min(deadline, res.arrivals[members.back()]);
    }
    i = members.back() + 1;
    windows.push_back({std::move(members), close});
  }
  // One batch at a time; windows closed by the time the server frees up are merged.
  double server_free = 0;
  for (std::size_t w = 0; w < windows.size();) {
    const double start = std::max(windows[w].second, server_free);
    std::vector<std::size_t> batch;
    do {
      for (auto k : windows[w].first) res.queue_delays[k] = windows[w].second - res.arrivals[k];
      batch.insert(batch.end(), windows[w].first.begin(), windows[w].first.end());
      ++w;
    } while (cfg.window > 0 && w < windows.size() && windows[w].second <= start &&
             batch.size() + windows[w].first.size() <= cfg.max_batch);
    const double done = start + cfg.times.batch(batch.size());
    server_free = done;
    for (auto k : batch) res.latencies[k] = done - res.arrivals[k];
    res.batches.push_back(std::move(batch));
  }
  if (n) {
    double sum = 0;
    for (double l : res.latencies) sum += l;
    res.mean = sum / double(n);
    res.p50 = percentile(res.latencies, 50);
    res.p99 = percentile(res.latencies, 99);
    res.throughput = double(n) / std::max(server_free, cfg.duration);
  }
  return res;
}

}  // namespace ive::service
