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
#include <chrono>
#include <cstdint>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "ive/pir/server.hpp"
#include "ive/service/cluster.hpp"
#include "ive/service/frame.hpp"
#include "ive/service/window.hpp"

namespace ive::service {

enum class Role { Standalone, Coordinator, Worker };

inline Role parse_role(const std::string& s) {
  if (s == "standalone") return Role::Standalone;
  if (s == "coordinator") return Role::Coordinator;
  if (s == "worker") return Role::Worker;
  throw UsageError("role must be standalone, coordinator or worker, got '" + s + "'");
}

struct ServerConfig {
  Endpoint listen{"127.0.0.1", 0};
  ParamsPtr params;
  std::string db_path;
  std::shared_ptr<const DatabaseImage> db;  // used instead of db_path when set
  WindowPolicy window;
  std::optional<ScanCalibration> calibration;
  std::size_t max_batch = 64;
  std::size_t width = default_parallelism();
  Role role = Role::Standalone;
  std::vector<Endpoint> peers;   // coordinator: workers in row order
  std::uint32_t worker_index = 0;
  std::uint32_t workers = 1;     // worker: cluster size
  std::chrono::milliseconds gather_timeout{120000};
};

/// Counters and per-request measurements, copied out by PirServer::stats().
struct ServiceStats {
  std::uint64_t batches = 0;
  std::uint64_t requests = 0;
  ScanCounters scan;
  std::vector<std::size_t> batch_sizes;
  std::vector<double> queue_delays;  // window close minus arrival, seconds
  std::vector<std::pair<std::uint64_t, Digest>> key_used;  // request id, key bundle digest
  std::vector<std::size_t> partial_payload_bytes;           // coordinator: PARTIAL payload sizes
};

/// Cached key bundle of one client.
struct KeyEntry {
  std::shared_ptr<const KeyBundle> keys;
  Digest digest{};
  Bytes raw;
};

/// Uniform random image of `rows` rows, used to calibrate the auto window where no DB is held.
inline DatabaseImage random_image(const ParamsPtr& params, std::uint64_t rows, std::uint64_t seed = 7) {
  Prng rng(seed);
  std::vector<RnsPoly> polys;
  for (std::uint64_t i = 0; i < rows * params->d0(); ++i) polys.push_back(uniform_poly(params->ring(), rng, Domain::Eval));
  return DatabaseImage(params, 1, 0, rows, std::move(polys));
}

class PirServer {
 public:
  explicit PirServer(ServerConfig cfg) : cfg_(std::move(cfg)) {
    if (!cfg_.params) throw UsageError("server needs parameters");
    const PirParams& P = *cfg_.params;
    query_limit_ = serialize_query(PirQuery{BfvCiphertext::zero(P.ring())}, P).size();
    frame_limit_ = stored_ct_bytes(P) * (std::uint64_t{P.m()} * P.ell() + 2 * P.ell()) + 4096;
    load_db();
    window_ = compute_window();
    sched_ = std::make_unique<WindowScheduler<Pending>>(window_, cfg_.max_batch);
  }
  ~PirServer() { stop(); }
  PirServer(const PirServer&) = delete;
  PirServer& operator=(const PirServer&) = delete;

  void start() {
    if (cfg_.role == Role::Coordinator) connect_workers();
    listener_ = listen_on(cfg_.listen, &port_);
    running_ = true;
    accept_thread_ = std::jthread([this] { accept_loop(); });
    if (cfg_.role != Role::Worker) dispatch_thread_ = std::jthread([this] { dispatch_loop(); });
  }

  void stop() {
    if (!running_.exchange(false)) return;
    listener_.shutdown();
    sched_->close();
    {
      std::lock_guard lk(conn_mu_);
      for (auto& c : conns_) c->socket().shutdown();
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    if (dispatch_thread_.joinable()) dispatch_thread_.join();
    std::list<std::jthread> threads;
    {
      std::lock_guard lk(conn_mu_);
      threads.swap(conn_threads_);
    }
    threads.clear();
    for (auto& w : workers_) w->chan.socket().shutdown();
  }

  /// Blocks the caller until stop() is called from elsewhere.
  void wait() const {
    while (running_) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }

  std::uint16_t port() const { return port_; }
  Seconds window() const { return window_; }
  const DatabaseImage* db() const { return db_.get(); }
  std::size_t query_limit() const { return query_limit_; }

  ServiceStats stats() const {
    std::lock_guard lk(stats_mu_);
    return stats_;
  }

 private:
  struct Pending {
    std::shared_ptr<Channel> conn;
    std::uint64_t client_id = 0;
    std::uint64_t request_id = 0;
    PirQuery query;
    Bytes raw_query;
    std::shared_ptr<const KeyEntry> key;
  };

  struct WorkerLink {
    Endpoint ep;
    Channel chan;
    std::mutex mu;
    WorkerLink(Endpoint e, Socket s) : ep(std::move(e)), chan(std::move(s)) {}
  };

  void load_db() {
    const PirParams& P = *cfg_.params;
    if (cfg_.role == Role::Coordinator) return;
    RowRange range{0, P.rows()};
    if (cfg_.role == Role::Worker) {
      plan_ = rlp_partition(P, cfg_.workers);
      if (cfg_.worker_index >= cfg_.workers) throw UsageError("worker index outside the cluster");
      range = plan_.ranges[cfg_.worker_index];
    }
    if (cfg_.db) {
      if (cfg_.db->row_begin() == range.begin && cfg_.db->row_count() == range.count)
        db_ = cfg_.db;
      else
        db_ = std::make_shared<const DatabaseImage>(cfg_.db->slice(range.begin, range.count));
    } else {
      if (cfg_.db_path.empty()) throw UsageError("server needs a database");
      db_ = std::make_shared<const DatabaseImage>(read_db_file(cfg_.db_path, cfg_.params, range.begin, range.count));
    }
  }

  Seconds compute_window() {
    if (!cfg_.window.automatic) return cfg_.window.fixed;
    if (cfg_.role == Role::Coordinator) {
      // Workers scan their slices concurrently; one slice scan bounds the batch.
      auto plan = rlp_partition(*cfg_.params, static_cast<std::uint32_t>(std::max<std::size_t>(1, cfg_.peers.size())));
      DatabaseImage probe = random_image(cfg_.params, plan.ranges[0].count);
      ScanCalibration c = cfg_.calibration ? *cfg_.calibration : calibrate_scan(probe, 3, cfg_.width);
      return window_duration(cfg_.window, probe, c);
    }
    ScanCalibration c = cfg_.calibration ? *cfg_.calibration : calibrate_scan(*db_, 3, cfg_.width);
    return window_duration(cfg_.window, *db_, c);
  }

  void connect_workers() {
    if (cfg_.peers.empty()) throw UsageError("coordinator needs at least one worker");
    plan_ = rlp_partition(*cfg_.params, static_cast<std::uint32_t>(cfg_.peers.size()));
    for (auto& ep : cfg_.peers) {
      auto link = std::make_unique<WorkerLink>(ep, connect_to(ep));
      link->chan.send(hello_frame(cfg_.params->digest()));
      auto f = link->chan.recv(frame_limit_, cfg_.gather_timeout);
      if (!f) throw ProtocolError("worker " + ep.str() + " closed during HELLO");
      if (f->type == MsgType::Error) throw ProtocolError("worker " + ep.str() + ": " + parse_error(f->payload).message);
      if (f->type != MsgType::Hello || parse_hello(f->payload).params_digest != cfg_.params->digest())
        throw FormatError("worker " + ep.str() + " runs different parameters");
      workers_.push_back(std::move(link));
    }
  }

  void accept_loop() {
    while (running_) {
      Socket s = accept_on(listener_);
      if (!s.valid()) break;
      auto ch = std::make_shared<Channel>(std::move(s));
      std::lock_guard lk(conn_mu_);
      if (!running_) break;
      conns_.push_back(ch);
      conn_threads_.emplace_back([this, ch] { serve_connection(ch); });
    }
  }

  void serve_connection(std::shared_ptr<Channel> ch) {
    std::vector<Pending> worker_queue;  // worker role: queries of the batch being assembled
    bool greeted = false;
    try {
      while (running_) {
        auto f = ch->recv(frame_limit_);
        if (!f) break;
        if (!greeted) {
          if (f->type != MsgType::Hello) throw ProtocolError("expected HELLO first");
          Hello h = parse_hello(f->payload);
          if (h.version != kProtocolVersion) {
            ch->send(error_frame(0, ErrorCode::Protocol, "unsupported protocol version " + std::to_string(h.version)));
            break;
          }
          if (h.params_digest != cfg_.params->digest()) {
            ch->send(error_frame(0, ErrorCode::ParamsMismatch, "parameter digest mismatch"));
            break;
          }
          ch->send(hello_frame(cfg_.params->digest()));
          greeted = true;
          continue;
        }
        switch (f->type) {
          case MsgType::KeyUpload: on_key_upload(*ch, *f); break;
          case MsgType::Query: on_query(ch, *f, worker_queue); break;
          case MsgType::Finalize:
            if (cfg_.role != Role::Worker) throw ProtocolError("FINALIZE sent to a non-worker");
            on_finalize(*ch, *f, worker_queue);
            break;
          default: throw ProtocolError("unexpected message type " + std::to_string(int(f->type)));
        }
      }
    } catch (const ProtocolError& e) {
      try_send(*ch, error_frame(0, ErrorCode::Protocol, e.what()));
    } catch (const FormatError& e) {
      try_send(*ch, error_frame(0, ErrorCode::Protocol, e.what()));
    } catch (const std::exception&) {
      // transport failure: drop the connection
    }
    ch->socket().shutdown();
  }

  static void try_send(Channel& ch, const Frame& f) {
    try {
      ch.send(f);
    } catch (const std::exception&) {
    }
  }

  void on_key_upload(Channel& ch, const Frame& f) {
    Tagged t = split_u64(f.payload);
    auto entry = std::make_shared<KeyEntry>();
    entry->keys = std::make_shared<const KeyBundle>(deserialize_bundle(t.body, *cfg_.params));
    entry->digest = sha256(t.body);
    entry->raw.assign(t.body.begin(), t.body.end());
    if (cfg_.role == Role::Coordinator) forward_keys(t.a, *entry);
    {
      std::lock_guard lk(key_mu_);
      keys_[t.a] = entry;
    }
    ch.send(key_ack_frame(t.a, entry->digest));
  }

  void forward_keys(std::uint64_t client, const KeyEntry& e) {
    for (auto& w : workers_) {
      std::lock_guard lk(w->mu);
      w->chan.send(key_upload_frame(client, e.raw));
      auto f = w->chan.recv(frame_limit_, cfg_.gather_timeout);
      if (!f || f->type != MsgType::KeyUpload) throw ProtocolError("worker " + w->ep.str() + " did not ack the keys");
      Tagged a = split_u64(f->payload);
      if (a.a != client || !std::equal(a.body.begin(), a.body.end(), e.digest.begin()))
        throw ProtocolError("worker " + w->ep.str() + " acked different keys");
    }
  }

  void on_query(const std::shared_ptr<Channel>& ch, const Frame& f, std::vector<Pending>& worker_queue) {
    Tagged t = split_u64_u64(f.payload);
    if (t.body.size() > query_limit_) {
      ch->send(error_frame(t.b, ErrorCode::TooLarge,
                           "query of " + std::to_string(t.body.size()) + " bytes exceeds the size limit of " +
                               std::to_string(query_limit_)));
      return;
    }
    std::shared_ptr<const KeyEntry> key;
    {
      std::lock_guard lk(key_mu_);
      auto it = keys_.find(t.a);
      if (it != keys_.end()) key = it->second;
    }
    if (!key) {
      ch->send(error_frame(t.b, ErrorCode::UnknownKey, "no keys uploaded for client " + std::to_string(t.a)));
      return;
    }
    Pending p;
    p.conn = ch;
    p.client_id = t.a;
    p.request_id = t.b;
    try {
      p.query = deserialize_query(t.body, *cfg_.params);
    } catch (const FormatError& e) {
      ch->send(error_frame(t.b, ErrorCode::Protocol, e.what()));
      return;
    }
    p.key = key;
    if (cfg_.role == Role::Worker) {
      worker_queue.push_back(std::move(p));
      return;
    }
    if (cfg_.role == Role::Coordinator) p.raw_query.assign(t.body.begin(), t.body.end());
    sched_->submit(std::move(p));
  }

  void on_finalize(Channel& ch, const Frame& f, std::vector<Pending>& queue) {
    ByteReader r(f.payload);
    r.u64();
    std::uint32_t count = r.u32();
    if (count != queue.size())
      throw ProtocolError("FINALIZE announces " + std::to_string(count) + " queries, received " +
                          std::to_string(queue.size()));
    std::vector<BatchItem> items;
    for (auto& p : queue) items.push_back({&p.query, p.key->keys.get()});
    ScanCounters sc;
    auto out = answer_batch(*db_, items, &sc, cfg_.width);
    record(queue.size(), sc, {}, queue);
    for (std::size_t i = 0; i < queue.size(); ++i)
      ch.send(partial_frame(queue[i].request_id, cfg_.worker_index, serialize_ct(out[i].ct, *cfg_.params)));
    queue.clear();
  }

  void record(std::size_t n, const ScanCounters& sc, const std::vector<double>& delays,
              const std::vector<Pending>& items, const std::vector<std::size_t>& partials = {}) {
    std::lock_guard lk(stats_mu_);
    stats_.batches++;
    stats_.requests += n;
    stats_.scan.db_bytes += sc.db_bytes;
    stats_.scan.client_bytes += sc.client_bytes;
    stats_.scan.batch += sc.batch;
    stats_.batch_sizes.push_back(n);
    stats_.queue_delays.insert(stats_.queue_delays.end(), delays.begin(), delays.end());
    for (auto& p : items) stats_.key_used.push_back({p.request_id, p.key->digest});
    stats_.partial_payload_bytes.insert(stats_.partial_payload_bytes.end(), partials.begin(), partials.end());
  }

  void dispatch_loop() {
    while (auto batch = sched_->next_batch()) {
      std::vector<double> delays;
      for (std::size_t i = 0; i < batch->items.size(); ++i)
        delays.push_back(Seconds(batch->window_closed[i] - batch->enqueued[i]).count());
      auto& items = batch->items;
      try {
        ScanCounters sc;
        std::vector<std::size_t> partials;
        std::vector<PirResponse> out =
            cfg_.role == Role::Coordinator ? run_cluster(batch->id, items, partials) : run_local(items, sc);
        record(items.size(), sc, delays, items, partials);
        for (std::size_t i = 0; i < items.size(); ++i)
          try_send(*items[i].conn, response_frame(items[i].request_id, serialize_response(out[i], *cfg_.params)));
      } catch (const std::exception& e) {
        ErrorCode code = dynamic_cast<const NetError*>(&e) ? ErrorCode::WorkerTimeout : ErrorCode::Internal;
        for (auto& p : items) try_send(*p.conn, error_frame(p.request_id, code, e.what()));
      }
    }
  }

  std::vector<PirResponse> run_local(const std::vector<Pending>& items, ScanCounters& sc) {
    std::vector<BatchItem> b;
    for (auto& p : items) b.push_back({&p.query, p.key->keys.get()});
    return answer_batch(*db_, b, &sc, cfg_.width);
  }

  std::vector<PirResponse> run_cluster(std::uint64_t batch_id, const std::vector<Pending>& items,
                                       std::vector<std::size_t>& partial_sizes) {
    const PirParams& P = *cfg_.params;
    std::vector<std::unique_lock<std::mutex>> locks;
    for (auto& w : workers_) locks.emplace_back(w->mu);
    for (auto& w : workers_) {
      for (auto& p : items) w->chan.send(query_frame(p.client_id, p.request_id, p.raw_query));
      w->chan.send(finalize_frame(batch_id, static_cast<std::uint32_t>(items.size())));
    }
    std::vector<ExpandedQuery> ex(items.size());
    parallel_for(items.size(), cfg_.width, [&](std::size_t i) { ex[i] = expand_query(items[i].query, *items[i].key->keys, P); });

    std::map<std::uint64_t, std::size_t> slot;
    for (std::size_t i = 0; i < items.size(); ++i) slot[items[i].request_id] = i;
    std::vector<std::vector<BfvCiphertext>> parts(items.size(), std::vector<BfvCiphertext>(workers_.size()));
    for (std::size_t w = 0; w < workers_.size(); ++w) {
      for (std::size_t k = 0; k < items.size(); ++k) {
        std::optional<Frame> f;
        try {
          f = workers_[w]->chan.recv(frame_limit_, cfg_.gather_timeout);
        } catch (const NetError& e) {
          throw NetError("missing partial from worker " + std::to_string(w) + " (" + workers_[w]->ep.str() +
                         "): " + e.what());
        }
        if (!f) throw NetError("worker " + std::to_string(w) + " (" + workers_[w]->ep.str() + ") closed the connection");
        if (f->type == MsgType::Error)
          throw ProtocolError("worker " + std::to_string(w) + ": " + parse_error(f->payload).message);
        if (f->type != MsgType::Partial) throw ProtocolError("expected PARTIAL from worker " + std::to_string(w));
        Tagged t = split_u64_u32(f->payload);
        auto it = slot.find(t.a);
        if (it == slot.end() || t.b != w) throw ProtocolError("unexpected PARTIAL from worker " + std::to_string(w));
        parts[it->second][w] = deserialize_ct(t.body, P);
        partial_sizes.push_back(f->payload.size());
      }
    }
    std::vector<PirResponse> out(items.size());
    parallel_for(items.size(), cfg_.width, [&](std::size_t i) {
      out[i] = coordinator_finalize(std::move(parts[i]), ex[i].selectors, P);
    });
    return out;
  }

  ServerConfig cfg_;
  std::size_t query_limit_ = 0;
  std::uint64_t frame_limit_ = 0;
  std::shared_ptr<const DatabaseImage> db_;
  ClusterPlan plan_;
  Seconds window_{0};
  std::unique_ptr<WindowScheduler<Pending>> sched_;
  Socket listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::jthread accept_thread_;
  std::jthread dispatch_thread_;
  std::mutex conn_mu_;
  std::vector<std::shared_ptr<Channel>> conns_;
  std::list<std::jthread> conn_threads_;
  std::vector<std::unique_ptr<WorkerLink>> workers_;
  std::mutex key_mu_;
  std::map<std::uint64_t, std::shared_ptr<const KeyEntry>> keys_;
  mutable std::mutex stats_mu_;
  ServiceStats stats_;
};

}  // namespace ive::service
