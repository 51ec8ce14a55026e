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

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <vector>

#include "ive/common/prng.hpp"
#include "ive/crypto/bfv.hpp"
#include "ive/pir/rowsel.hpp"

namespace ive::service {

using Clock = std::chrono::steady_clock;
using Seconds = std::chrono::duration<double>;

/// Wall time of one RowSel pass and the scan rate derived from it.
struct ScanCalibration {
  double seconds = 0;
  std::uint64_t db_bytes = 0;
  double bytes_per_second() const { return seconds > 0 ? double(db_bytes) / seconds : 0; }
};

/// Times one single-query RowSel over `db` with random Eval-domain inputs.
/// The best of `repeats` runs is kept.
inline ScanCalibration calibrate_scan(const DatabaseImage& db, int repeats = 3,
                                      std::size_t width = default_parallelism()) {
  const PirParams& params = db.params();
  Prng rng(0x5ca11b);
  std::vector<BfvCiphertext> cols;
  for (std::uint32_t k = 0; k < params.d0(); ++k)
    cols.push_back({uniform_poly(params.ring(), rng, Domain::Eval), uniform_poly(params.ring(), rng, Domain::Eval)});
  ScanCalibration best;
  for (int i = 0; i < repeats; ++i) {
    ScanCounters c;
    auto t0 = Clock::now();
    auto out = row_sel_batch(db, {&cols}, &c, width);
    double s = Seconds(Clock::now() - t0).count();
    if (i == 0 || s < best.seconds) best = {s, c.db_bytes};
  }
  return best;
}

/// Waiting-window setting: a fixed duration, or auto (one RowSel DB scan).
struct WindowPolicy {
  bool automatic = false;
  Seconds fixed{0};

  static WindowPolicy parse(const std::string& s) {
    if (s == "auto") return {true, Seconds(0)};
    try {
      std::size_t used = 0;
      double ms = std::stod(s, &used);
      std::string unit = s.substr(used);
      if (unit == "s") ms *= 1000;
      else if (unit == "us") ms /= 1000;
      else if (!unit.empty() && unit != "ms") throw std::invalid_argument(unit);
      if (ms < 0) throw std::invalid_argument("negative");
      return {false, Seconds(ms / 1000)};
    } catch (const std::exception&) {
      throw UsageError("window must be 'auto' or a duration such as 20ms, got '" + s + "'");
    }
  }
};

/// Fixed mode returns the setting. Auto mode scales the calibrated scan rate
/// to the stored size of `db`.
inline Seconds window_duration(const WindowPolicy& w, const DatabaseImage& db, const ScanCalibration& calib) {
  if (!w.automatic) return w.fixed;
  if (calib.bytes_per_second() <= 0) throw UsageError("auto window needs a scan calibration");
  return Seconds(double(db.stored_bytes()) / calib.bytes_per_second());
}

inline Seconds window_duration(const WindowPolicy& w, const DatabaseImage& db) {
  if (!w.automatic) return w.fixed;
  return window_duration(w, db, calibrate_scan(db));
}

/// Requests of one closed window.
template <typename T>
struct Batch {
  std::uint64_t id = 0;
  Clock::time_point open;
  Clock::time_point closed;
  std::vector<T> items;
  std::vector<Clock::time_point> enqueued;
  std::vector<Clock::time_point> window_closed;  // per request: when its own window closed
};

/// Windows sit on a fixed grid of `window` length starting at construction.
/// A request joins the window covering its arrival time; a window closes at
/// its deadline or when it holds `max_batch` requests, whichever comes
/// first. Windows that closed while the consumer was busy are merged into
/// one batch. A zero window dispatches every request on its own.
template <typename T>
class WindowScheduler {
 public:
  WindowScheduler(Seconds window, std::size_t max_batch)
      : window_(window), max_batch_(std::max<std::size_t>(1, max_batch)), epoch_(Clock::now()) {}

  Seconds window() const { return window_; }
  std::size_t max_batch() const { return max_batch_; }

  void submit(T item) {
    std::lock_guard lk(mu_);
    if (closed_) throw UsageError("scheduler is closed");
    const auto now = Clock::now();
    const bool zero = window_.count() <= 0;
    std::uint64_t slot = zero ? next_slot_++ : static_cast<std::uint64_t>(Seconds(now - epoch_) / window_);
    if (pending_.empty() || pending_.back().slot != slot || pending_.back().full || zero) {
      Open w;
      w.slot = slot;
      w.batch.id = next_id_++;
      if (zero) {
        w.batch.open = now;
        w.deadline = now;
      } else {
        w.batch.open = epoch_ + std::chrono::duration_cast<Clock::duration>(window_ * double(slot));
        w.deadline = w.batch.open + std::chrono::duration_cast<Clock::duration>(window_);
      }
      pending_.push_back(std::move(w));
    }
    Open& w = pending_.back();
    w.batch.items.push_back(std::move(item));
    w.batch.enqueued.push_back(now);
    if (w.batch.items.size() >= max_batch_ || zero) {
      w.full = true;
      w.full_at = now;
    }
    cv_.notify_all();
  }

  /// Blocks until the oldest window closes, then also takes every later
  /// window that has closed meanwhile, up to max_batch requests.
  /// std::nullopt once shut down and drained.
  std::optional<Batch<T>> next_batch() {
    std::unique_lock lk(mu_);
    for (;;) {
      if (!pending_.empty()) {
        if (closed_now(pending_.front(), Clock::now())) break;
        cv_.wait_until(lk, pending_.front().deadline);
      } else {
        if (closed_) return std::nullopt;
        cv_.wait(lk);
      }
    }
    const auto now = Clock::now();
    Batch<T> b = take(pending_.front(), now);
    pending_.pop_front();
    while (window_.count() > 0 && !pending_.empty() && closed_now(pending_.front(), now) &&
           b.items.size() + pending_.front().batch.items.size() <= max_batch_) {
      Batch<T> more = take(pending_.front(), now);
      pending_.pop_front();
      for (std::size_t i = 0; i < more.items.size(); ++i) {
        b.items.push_back(std::move(more.items[i]));
        b.enqueued.push_back(more.enqueued[i]);
        b.window_closed.push_back(more.window_closed[i]);
      }
      b.closed = more.closed;
    }
    return b;
  }

  void close() {
    std::lock_guard lk(mu_);
    closed_ = true;
    cv_.notify_all();
  }

 private:
  struct Open {
    std::uint64_t slot = 0;
    Clock::time_point deadline;
    Clock::time_point full_at;
    bool full = false;
    Batch<T> batch;
  };

  bool closed_now(const Open& w, Clock::time_point now) const { return w.full || now >= w.deadline || closed_; }

  Batch<T> take(Open& w, Clock::time_point now) {
    Batch<T> b = std::move(w.batch);
    b.closed = w.full ? std::min(w.full_at, w.deadline) : w.deadline;
    if (closed_ && !w.full && now < w.deadline) b.closed = now;
    b.window_closed.assign(b.items.size(), b.closed);
    return b;
  }

  Seconds window_;
  std::size_t max_batch_;
  Clock::time_point epoch_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Open> pending_;
  std::uint64_t next_slot_ = 0;
  std::uint64_t next_id_ = 1;
  bool closed_ = false;
};

}  // namespace ive::service
