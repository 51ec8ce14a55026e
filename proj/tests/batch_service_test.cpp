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


#include <sys/socket.h>

#include <chrono>
#include <thread>

#include <gtest/gtest.h>

#include "ive/pir/client.hpp"
#include "ive/service/client.hpp"
#include "ive/service/load.hpp"
#include "ive/service/server.hpp"

namespace ive::service {
namespace {

using namespace std::chrono_literals;

ParamsPtr small_params(std::uint32_t d = 3) {
  ParamOverrides o;
  o.d0 = 16;
  o.d = d;
  return PirParams::profile("test", o);
}

struct Fixture {
  ParamsPtr params;
  std::vector<Bytes> records;
  std::shared_ptr<const DatabaseImage> db;
  std::uint64_t record_bytes;

  explicit Fixture(std::uint32_t d = 3, std::uint64_t seed = 5) : params(small_params(d)) {
    record_bytes = params->poly_payload_bytes();
    records.assign(params->total_polys(), Bytes(record_bytes));
    for (std::uint64_t i = 0; i < records.size(); ++i) synthetic_record(seed, i, records[i]);
    db = std::make_shared<const DatabaseImage>(preprocess_db(params, records, record_bytes));
  }

  ServerConfig config(Seconds window = Seconds(0), std::size_t max_batch = 64) const {
    ServerConfig c;
    c.params = params;
    c.db = db;
    c.window.fixed = window;
    c.max_batch = max_batch;
    c.width = 1;
    return c;
  }
};

std::pair<Socket, Socket> socket_pair() {
  int fds[2];
  EXPECT_EQ(::socketpair(AF_UNIX, SOCK_STREAM, 0, fds), 0);
  return {Socket(fds[0]), Socket(fds[1])};
}

TEST(Frame, RoundTripOverSocket) {
  auto [a, b] = socket_pair();
  Bytes payload = {1, 2, 3, 4, 5};
  a.send_all(encode_frame({MsgType::Query, payload}));
  a.send_all(encode_frame({MsgType::Hello, {}}));
  auto f = recv_frame(b);
  ASSERT_TRUE(f);
  EXPECT_EQ(f->type, MsgType::Query);
  EXPECT_EQ(f->payload, payload);
  EXPECT_EQ(recv_frame(b)->payload.size(), 0u);
  a.close();
  EXPECT_FALSE(recv_frame(b));
}

TEST(Frame, LayoutIsTypeThenLittleEndianLength) {
  Bytes enc = encode_frame({MsgType::Error, Bytes(258)});
  ASSERT_EQ(enc.size(), 9u + 258);
  EXPECT_EQ(enc[0], 0x7F);
  EXPECT_EQ(enc[1], 2);
  EXPECT_EQ(enc[2], 1);
  for (int i = 3; i < 9; ++i) EXPECT_EQ(enc[i], 0);
  Frame h = hello_frame(Digest{});
  EXPECT_EQ(h.payload[0], 0x01);
  EXPECT_EQ(h.payload[1], 0x00);
  EXPECT_EQ(h.payload.size(), 2u + 32);
}

TEST(Frame, MalformedFramesRejected) {
  auto [a, b] = socket_pair();
  Bytes bad = {0x42, 0, 0, 0, 0, 0, 0, 0, 0};
  a.send_all(bad);
  EXPECT_THROW(recv_frame(b), ProtocolError);
  auto [c, d] = socket_pair();
  c.send_all(encode_frame({MsgType::Query, Bytes(100)}));
  EXPECT_THROW(recv_frame(d, 50), ProtocolError);
  auto [e, f] = socket_pair();
  Bytes cut = encode_frame({MsgType::Query, Bytes(100)});
  cut.resize(40);
  e.send_all(cut);
  e.close();
  EXPECT_THROW(recv_frame(f), NetError);
}

TEST(Window, ZeroWindowDispatchesEachRequest) {
  WindowScheduler<int> s(Seconds(0), 64);
  for (int i = 0; i < 5; ++i) s.submit(i);
  for (int i = 0; i < 5; ++i) {
    auto b = s.next_batch();
    ASSERT_TRUE(b);
    ASSERT_EQ(b->items.size(), 1u);
    EXPECT_EQ(b->items[0], i);
  }
}

TEST(Window, MaxBatchClosesEarly) {
  WindowScheduler<int> s(Seconds(30), 3);
  auto t0 = Clock::now();
  for (int i = 0; i < 7; ++i) s.submit(i);
  auto b1 = s.next_batch();
  auto b2 = s.next_batch();
  EXPECT_LT(Seconds(Clock::now() - t0).count(), 5.0);
  EXPECT_EQ(b1->items, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(b2->items, (std::vector<int>{3, 4, 5}));
  s.close();
  auto b3 = s.next_batch();
  ASSERT_TRUE(b3);
  EXPECT_EQ(b3->items, (std::vector<int>{6}));
  EXPECT_FALSE(s.next_batch());
}

TEST(Window, DeadlineBoundsQueueingDelay) {
  const Seconds w(0.05);
  WindowScheduler<int> s(w, 1000);
  std::jthread producer([&] {
    for (int i = 0; i < 40; ++i) {
      s.submit(i);
      std::this_thread::sleep_for(7ms);
    }
    s.close();
  });
  std::size_t seen = 0;
  while (auto b = s.next_batch()) {
    EXPECT_GE(b->enqueued.front(), b->open);
    for (std::size_t i = 0; i < b->items.size(); ++i)
      EXPECT_LE(Seconds(b->window_closed[i] - b->enqueued[i]).count(), w.count() + 1e-9);
    seen += b->items.size();
  }
  EXPECT_EQ(seen, 40u);
}

TEST(Window, AutoDurationTracksMeasuredScan) {
  Fixture fx(4);
  ScanCalibration calib = calibrate_scan(*fx.db, 3, 1);
  WindowPolicy a = WindowPolicy::parse("auto");
  Seconds w = window_duration(a, *fx.db, calib);
  // Independent measurement of one scan.
  Prng rng(99);
  std::vector<BfvCiphertext> cols;
  for (std::uint32_t k = 0; k < fx.params->d0(); ++k)
    cols.push_back({uniform_poly(fx.params->ring(), rng, Domain::Eval), uniform_poly(fx.params->ring(), rng, Domain::Eval)});
  auto t0 = Clock::now();
  row_sel_batch(*fx.db, {&cols}, nullptr, 1);
  double measured = Seconds(Clock::now() - t0).count();
  EXPECT_GE(w.count(), 0.5 * measured);
  EXPECT_LE(w.count(), 2.0 * measured);
  DatabaseImage half = fx.db->slice(0, fx.params->rows() / 2);
  EXPECT_GE(w.count(), 2 * window_duration(a, half, calib).count() - 1e-12);
  EXPECT_EQ(window_duration(WindowPolicy::parse("0"), *fx.db, calib).count(), 0);
  EXPECT_NEAR(WindowPolicy::parse("20ms").fixed.count(), 0.02, 1e-12);
  EXPECT_THROW(WindowPolicy::parse("soon"), UsageError);
}

TEST(Cluster, PartitionShapes) {
  auto p1 = rlp_partition(*small_params(4), 1);
  ASSERT_EQ(p1.ranges.size(), 1u);
  EXPECT_EQ(p1.ranges[0].count, 16u);
  EXPECT_EQ(p1.d_local, 4u);
  auto p4 = rlp_partition(*small_params(4), 4);
  EXPECT_EQ(p4.d_local, 2u);
  std::uint64_t next = 0;
  for (auto& r : p4.ranges) {
    EXPECT_EQ(r.begin, next);
    EXPECT_EQ(r.count, 4u);
    next += r.count;
  }
  EXPECT_EQ(next, 16u);
  EXPECT_EQ(rlp_partition(*small_params(4), 16).d_local, 0u);
  EXPECT_THROW(rlp_partition(*small_params(4), 3), UsageError);
  EXPECT_THROW(rlp_partition(*small_params(4), 0), UsageError);
  EXPECT_THROW(rlp_partition(*small_params(4), 32), UsageError);
}

TEST(Cluster, SlicesReconstructDigest) {
  Fixture fx(3);
  for (std::uint32_t w : {1u, 2u, 4u, 8u}) {
    auto plan = rlp_partition(*fx.params, w);
    std::vector<DatabaseImage> parts;
    for (auto& r : plan.ranges) parts.push_back(fx.db->slice(r.begin, r.count));
    std::vector<const DatabaseImage*> ptrs;
    for (std::uint32_t k = 0; k < w; ++k) {
      check_slice(plan, k, parts[k]);
      ptrs.push_back(&parts[k]);
    }
    EXPECT_EQ(DatabaseImage::digest_of(*fx.params, fx.record_bytes, ptrs), fx.db->digest());
  }
}

TEST(Service, SingleRequestMatchesStandaloneAnswer) {
  Fixture fx;
  PirServer server(fx.config());
  server.start();
  PirClient pc(fx.params, 11);
  ServiceClient sc({"127.0.0.1", server.port()}, fx.params);
  Digest ack = sc.upload_keys(7, pc.bundle());
  EXPECT_EQ(ack, sha256(serialize_bundle(pc.bundle(), *fx.params)));
  auto [q, loc] = pc.query_record(37, fx.record_bytes);
  PirResponse r = sc.query(7, 1, q);
  EXPECT_EQ(serialize_response(r, *fx.params), serialize_response(answer_query(*fx.db, q, pc.bundle()), *fx.params));
  EXPECT_EQ(pc.decode(r, loc).bytes, fx.records[37]);
}

TEST(Service, BatchOfDistinctIndicesAllCorrect) {
  Fixture fx;
  const std::size_t B = 6;
  PirServer server(fx.config(Seconds(30), B));
  server.start();
  PirClient pc(fx.params, 12);
  ServiceClient sc({"127.0.0.1", server.port()}, fx.params);
  sc.upload_keys(1, pc.bundle());
  std::map<std::uint64_t, std::pair<std::uint64_t, RecordLocator>> sent;
  for (std::uint64_t i = 0; i < B; ++i) {
    std::uint64_t idx = (i * 29 + 3) % fx.records.size();
    auto [q, loc] = pc.query_record(idx, fx.record_bytes);
    sent[100 + i] = {idx, loc};
    sc.send_query(1, 100 + i, q);
  }
  for (std::size_t i = 0; i < B; ++i) {
    auto [id, resp] = sc.recv_response();
    ASSERT_TRUE(sent.count(id));
    auto dec = pc.decode(resp, sent[id].second);
    EXPECT_FALSE(dec.exhausted);
    EXPECT_EQ(dec.bytes, fx.records[sent[id].first]);
  }
  auto st = server.stats();
  ASSERT_EQ(st.batch_sizes, std::vector<std::size_t>{B});
  EXPECT_EQ(st.scan.db_bytes, fx.db->stored_bytes());
  EXPECT_DOUBLE_EQ(st.scan.db_bytes_per_query(), double(fx.db->stored_bytes()) / B);
}

TEST(Service, ScanBytesPerBatchIndependentOfBatchSize) {
  Fixture fx;
  PirClient pc(fx.params, 13);
  auto q = pc.query_poly(5);
  std::vector<std::uint64_t> per_batch, client_per_query;
  for (std::size_t B : {1u, 3u, 8u}) {
    PirServer server(fx.config(Seconds(30), B));
    server.start();
    ServiceClient sc({"127.0.0.1", server.port()}, fx.params);
    sc.upload_keys(1, pc.bundle());
    for (std::size_t i = 0; i < B; ++i) sc.send_query(1, i, q);
    for (std::size_t i = 0; i < B; ++i) sc.recv_response();
    auto st = server.stats();
    per_batch.push_back(st.scan.db_bytes);
    client_per_query.push_back(st.scan.client_bytes / B);
  }
  EXPECT_EQ(per_batch[0], per_batch[1]);
  EXPECT_EQ(per_batch[0], per_batch[2]);
  EXPECT_EQ(client_per_query[0], client_per_query[1]);
  EXPECT_EQ(client_per_query[0], client_per_query[2]);
}

TEST(Service, QueueDelayWithinWindowAndKeysCoherent) {
  Fixture fx;
  const Seconds w(0.2);
  PirServer server(fx.config(w, 64));
  server.start();
  PirClient pc(fx.params, 14);
  ServiceClient sc({"127.0.0.1", server.port()}, fx.params);
  Digest ack = sc.upload_keys(3, pc.bundle());
  const int R = 5;
  for (int i = 0; i < R; ++i) {
    sc.send_query(3, i, pc.query_poly(static_cast<std::uint64_t>(i)));
    std::this_thread::sleep_for(60ms);
  }
  for (int i = 0; i < R; ++i) sc.recv_response();
  auto st = server.stats();
  ASSERT_EQ(st.queue_delays.size(), std::size_t(R));
  for (double d : st.queue_delays) EXPECT_LE(d, w.count() + 1e-9);
  ASSERT_EQ(st.key_used.size(), std::size_t(R));
  for (auto& [id, dg] : st.key_used) EXPECT_EQ(dg, ack);
}

TEST(Service, RejectsUnknownKeyOversizeAndBadParams) {
  Fixture fx;
  PirServer server(fx.config());
  server.start();
  PirClient pc(fx.params, 15);
  {
    ServiceClient sc({"127.0.0.1", server.port()}, fx.params);
    sc.send_query(99, 1, pc.query_poly(0));
    try {
      sc.recv_response();
      FAIL();
    } catch (const RemoteError& e) {
      EXPECT_EQ(e.code(), ErrorCode::UnknownKey);
      EXPECT_EQ(e.request_id(), 1u);
    }
    sc.upload_keys(99, pc.bundle());
    Bytes big(server.query_limit() + 1);
    sc.send_raw_query(99, 2, big);
    try {
      sc.recv_response();
      FAIL();
    } catch (const RemoteError& e) {
      EXPECT_EQ(e.code(), ErrorCode::TooLarge);
      EXPECT_NE(std::string(e.what()).find("size limit"), std::string::npos);
    }
    // The connection survives per-request rejections.
    EXPECT_NO_THROW(sc.query(99, 3, pc.query_poly(1)));
  }
  {
    ParamOverrides o;
    o.d0 = 16;
    o.d = 2;
    auto other = PirParams::profile("test", o);
    try {
      ServiceClient bad({"127.0.0.1", server.port()}, other);
      FAIL();
    } catch (const RemoteError& e) {
      EXPECT_EQ(e.code(), ErrorCode::ParamsMismatch);
    }
  }
  {
    Socket s = connect_to({"127.0.0.1", server.port()});
    Bytes junk = {0x55, 1, 0, 0, 0, 0, 0, 0, 0, 0};
    s.send_all(junk);
    auto f = recv_frame(s);
    ASSERT_TRUE(f);
    EXPECT_EQ(f->type, MsgType::Error);
    EXPECT_EQ(parse_error(f->payload).code, ErrorCode::Protocol);
  }
}

TEST(Service, ClusterResponsesBitIdenticalToStandalone) {
  Fixture fx;
  PirClient pc(fx.params, 16);
  std::vector<std::pair<PirQuery, RecordLocator>> qs;
  for (std::uint64_t idx : {0ull, 45ull, 127ull}) qs.push_back(pc.query_record(idx, fx.record_bytes));
  for (std::uint32_t W : {1u, 2u, 4u}) {
    std::vector<std::unique_ptr<PirServer>> workers;
    ServerConfig coord = fx.config(Seconds(30), qs.size());
    coord.role = Role::Coordinator;
    coord.db = nullptr;
    for (std::uint32_t w = 0; w < W; ++w) {
      ServerConfig c = fx.config();
      c.role = Role::Worker;
      c.worker_index = w;
      c.workers = W;
      workers.push_back(std::make_unique<PirServer>(c));
      workers.back()->start();
      EXPECT_EQ(workers.back()->db()->row_count(), fx.params->rows() / W);
      coord.peers.push_back({"127.0.0.1", workers.back()->port()});
    }
    PirServer server(coord);
    server.start();
    ServiceClient sc({"127.0.0.1", server.port()}, fx.params);
    sc.upload_keys(1, pc.bundle());
    for (std::size_t i = 0; i < qs.size(); ++i) sc.send_query(1, i, qs[i].first);
    for (std::size_t i = 0; i < qs.size(); ++i) {
      auto [id, r] = sc.recv_response();
      EXPECT_EQ(serialize_response(r, *fx.params),
                serialize_response(answer_query(*fx.db, qs[id].first, pc.bundle()), *fx.params))
          << "W=" << W;
    }
    auto st = server.stats();
    ASSERT_EQ(st.partial_payload_bytes.size(), W * qs.size());
    for (auto b : st.partial_payload_bytes)
      EXPECT_EQ(b, 12 + serialize_ct(BfvCiphertext::zero(fx.params->ring()), *fx.params).size());
  }
}

TEST(Service, MissingPartialNamesWorker) {
  Fixture fx;
  // A peer that completes the handshake and key exchange, then never answers queries.
  std::uint16_t port = 0;
  Socket listener = listen_on({"127.0.0.1", 0}, &port);
  std::jthread silent([&] {
    Socket s = accept_on(listener);
    Channel ch(std::move(s));
    while (auto f = ch.recv()) {
      if (f->type == MsgType::Hello) ch.send(hello_frame(fx.params->digest()));
      if (f->type == MsgType::KeyUpload) {
        Tagged t = split_u64(f->payload);
        ch.send(key_ack_frame(t.a, sha256(t.body)));
      }
    }
  });
  ServerConfig coord = fx.config();
  coord.role = Role::Coordinator;
  coord.peers = {{"127.0.0.1", port}};
  coord.gather_timeout = 300ms;
  PirServer server(coord);
  server.start();
  PirClient pc(fx.params, 17);
  ServiceClient sc({"127.0.0.1", server.port()}, fx.params);
  sc.upload_keys(1, pc.bundle());
  sc.send_query(1, 9, pc.query_poly(2));
  try {
    sc.recv_response();
    FAIL();
  } catch (const RemoteError& e) {
    EXPECT_EQ(e.code(), ErrorCode::WorkerTimeout);
    EXPECT_NE(std::string(e.what()).find("worker 0"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find(std::to_string(port)), std::string::npos);
  }
  server.stop();
  listener.shutdown();
}

TEST(Load, DeterministicForSeed) {
  LoadConfig c;
  c.rate = 20;
  c.duration = 30;
  c.window = 0.05;
  c.times = {0.01, 0.03, 0.001, 0.01};
  auto a = poisson_load(c), b = poisson_load(c);
  EXPECT_EQ(a.arrivals, b.arrivals);
  EXPECT_EQ(a.batches, b.batches);
  EXPECT_EQ(a.latencies, b.latencies);
  c.seed = 2;
  EXPECT_NE(poisson_load(c).arrivals, a.arrivals);
}

TEST(Load, IdleLimitIsSingleLatencyPlusHalfWindow) {
  LoadConfig c;
  c.rate = 0.01;
  c.duration = 2e5;
  c.window = 1.0;
  c.times = {0.5, 1.0, 0.05, 0.5};
  auto r = poisson_load(c);
  ASSERT_GT(r.arrivals.size(), 1000u);
  EXPECT_NEAR(r.mean, r.single + c.window / 2, 0.05 * r.single);
  for (std::size_t i = 0; i < r.queue_delays.size(); ++i) EXPECT_LE(r.queue_delays[i], c.window);
}

TEST(Load, AutoWindowKeepsLatencyUnderTwiceSingle) {
  // RowSel is at least half of the single-query time; window = one scan.
  // Loads are arrival rates in units of 1 / single-query latency.
  for (double scan_share : {0.5, 0.7, 0.9}) {
    StageTimes t{(1 - scan_share) / 2, scan_share, 0.02 * scan_share, (1 - scan_share) / 2};
    for (double load : {0.1, 0.5, 0.8}) {
      LoadConfig c;
      c.rate = load / t.single();
      c.duration = 2000 * t.single();
      c.window = t.scan;
      c.times = t;
      auto r = poisson_load(c);
      EXPECT_LE(r.mean, 2 * t.single()) << "scan share " << scan_share << " load " << load;
    }
  }
}

TEST(Load, CalibratedFromMeasuredStages) {
  Fixture fx;
  PirClient pc(fx.params, 18);
  StageTimes t = measure_stage_times(*fx.db, pc.query_poly(3), pc.bundle());
  EXPECT_GT(t.expand, 0);
  EXPECT_GT(t.scan, 0);
  EXPECT_GT(t.coltor, 0);
  LoadConfig c;
  c.rate = 1e-3 / t.single();
  c.duration = 2e6 * t.single();
  c.window = t.scan;
  c.times = t;
  auto r = poisson_load(c);
  EXPECT_NEAR(r.mean, t.single() + t.scan / 2, 0.1 * t.single());
}

}  // namespace
}  // namespace ive::service
