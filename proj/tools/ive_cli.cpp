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


#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ive/pir/client.hpp"
#include "ive/pir/server.hpp"
#include "ive/sched/report.hpp"
#include "ive/service/client.hpp"
#include "ive/service/server.hpp"

namespace fs = std::filesystem;
using namespace ive;

namespace {

enum Exit { kOk = 0, kUsage = 2, kMismatch = 3, kProtocol = 4, kVerify = 5 };

/// Non-zero exit with a message, for failures that are not library errors.
struct CliExit {
  int code;
  std::string message;
};

struct ParamFlags {
  std::string profile = "test";
  ParamOverrides o;
  std::optional<std::uint32_t> n, moduli, d0, d, log2_z, ell, log2_p;

  void add(CLI::App* app) {
    app->add_option("--profile", profile, "parameter profile")->check(CLI::IsMember({"table1", "test"}));
    app->add_option("--n", n, "ring degree N");
    app->add_option("--moduli", moduli, "number of RNS moduli (1-4)");
    app->add_option("--d0", d0, "first-dimension size D0");
    app->add_option("--d", d, "number of ColTor dimensions");
    app->add_option("--log2-z", log2_z, "gadget base bits");
    app->add_option("--ell", ell, "gadget length");
    app->add_option("--log2-p", log2_p, "plaintext modulus bits");
  }
  ParamsPtr make() const {
    ParamOverrides ov;
    ov.n = n;
    ov.num_moduli = moduli;
    ov.d0 = d0;
    ov.d = d;
    ov.log2_z = log2_z;
    ov.ell = ell;
    ov.log2_p = log2_p;
    return PirParams::profile(profile, ov);
  }
};

void emit(const nlohmann::ordered_json& j) { std::cout << j.dump() << std::endl; }

// dbgen

struct DbgenArgs {
  ParamFlags pf;
  std::string out;
  std::string records_dir;
  std::uint64_t synthetic = 0;
  std::uint64_t record_bytes = 0;
  std::uint64_t seed = 1;
};

int cmd_dbgen(const DbgenArgs& a) {
  auto params = a.pf.make();
  std::uint64_t rb = a.record_bytes ? a.record_bytes : params->poly_payload_bytes();
  std::optional<DatabaseImage> db;
  std::uint64_t count = 0;
  if (!a.records_dir.empty()) {
    std::vector<fs::path> files;
    for (auto& e : fs::directory_iterator(a.records_dir))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<Bytes> recs;
    for (auto& f : files) {
      Bytes b = read_file(f.string());
      if (b.size() > rb)
        throw UsageError("record " + f.filename().string() + " is " + std::to_string(b.size()) +
                         " bytes, larger than the record size " + std::to_string(rb));
      b.resize(rb);
      recs.push_back(std::move(b));
    }
    count = recs.size();
    db.emplace(preprocess_db(params, recs, rb));
  } else {
    count = a.synthetic;
    const std::uint64_t seed = a.seed;
    db.emplace(preprocess_db(params, rb, count, [seed](std::uint64_t i, std::span<std::uint8_t> out) {
      synthetic_record(seed, i, out);
    }));
  }
  write_db_file(a.out, *db);
  const double raw = double(count) * double(rb);
  nlohmann::ordered_json j;
  j["cmd"] = "dbgen";
  j["path"] = a.out;
  j["profile"] = params->profile_name();
  j["records"] = count;
  j["record_bytes"] = rb;
  j["records_per_poly"] = db->records_per_poly();
  j["polys"] = db->poly_count();
  j["raw_bytes"] = static_cast<std::uint64_t>(raw);
  j["stored_bytes"] = db->stored_bytes();
  j["file_bytes"] = fs::file_size(a.out);
  j["expansion_factor"] = raw > 0 ? db->logical_bytes() / raw : 0.0;
  j["digest"] = to_hex(db->digest());
  emit(j);
  return kOk;
}

// keygen / query / answer / decode

int cmd_keygen(const ParamFlags& pf, const std::string& secret, const std::string& bundle, std::uint64_t seed) {
  auto params = pf.make();
  KeySet ks = keygen(*params, seed);
  write_file(secret, serialize_secret(ks.sk, *params));
  Bytes b = serialize_bundle(public_bundle(ks), *params);
  write_file(bundle, b);
  nlohmann::ordered_json j;
  j["cmd"] = "keygen";
  j["secret"] = secret;
  j["bundle"] = bundle;
  j["bundle_bytes"] = b.size();
  j["bundle_digest"] = to_hex(sha256(b));
  emit(j);
  return kOk;
}

RecordLocator locate_checked(const PirParams& params, std::uint64_t record_bytes, std::uint64_t index) {
  if (record_bytes == 0) record_bytes = params.poly_payload_bytes();
  std::uint64_t cap = params.total_polys() * records_per_poly(params, record_bytes);
  if (index >= cap)
    throw DomainError("record index " + std::to_string(index) + " out of range (capacity " + std::to_string(cap) + ")");
  return locate_record(params, record_bytes, index);
}

int cmd_query(const ParamFlags& pf, const std::string& secret, std::uint64_t index, std::uint64_t record_bytes,
              const std::string& out, std::uint64_t seed) {
  auto params = pf.make();
  SecretKey sk = deserialize_secret(read_file(secret), *params);
  RecordLocator loc = locate_checked(*params, record_bytes, index);
  Prng rng(seed);
  PirQuery q = build_query(sk, loc.poly, *params, rng);
  Bytes b = serialize_query(q, *params);
  write_file(out, b);
  nlohmann::ordered_json j;
  j["cmd"] = "query";
  j["index"] = index;
  j["poly"] = loc.poly;
  j["offset"] = loc.offset;
  j["query_bytes"] = b.size();
  emit(j);
  return kOk;
}

int cmd_answer(const ParamFlags& pf, const std::string& db_path, const std::string& query, const std::string& bundle,
               const std::string& out) {
  auto params = pf.make();
  DatabaseImage db = read_db_file(db_path, params);
  KeyBundle kb = deserialize_bundle(read_file(bundle), *params);
  PirQuery q = deserialize_query(read_file(query), *params);
  PirResponse r = answer_query(db, q, kb);
  Bytes b = serialize_response(r, *params);
  write_file(out, b);
  nlohmann::ordered_json j;
  j["cmd"] = "answer";
  j["response_bytes"] = b.size();
  emit(j);
  return kOk;
}

int decode_and_check(const PirParams& params, const SecretKey& sk, const PirResponse& r, std::uint64_t index,
                     std::uint64_t record_bytes, const std::string& out, const std::string& expected) {
  RecordLocator loc = locate_checked(params, record_bytes, index);
  DecodedRecord rec = decode_response(sk, r, loc, params);
  if (!out.empty()) write_file(out, rec.bytes);
  bool match = true;
  if (!expected.empty()) {
    Bytes e = read_file(expected);
    e.resize(loc.length);
    match = e == rec.bytes;
  }
  nlohmann::ordered_json j;
  j["cmd"] = "decode";
  j["index"] = index;
  j["budget_bits"] = rec.budget.bits;
  j["exhausted"] = rec.exhausted;
  if (!expected.empty()) j["matches_expected"] = match;
  j["record_sha256"] = to_hex(sha256(rec.bytes));
  emit(j);
  if (rec.exhausted) throw CliExit{kVerify, "noise budget exhausted: the result is not trustworthy"};
  if (!match) throw CliExit{kVerify, "decoded record differs from the expected file"};
  return kOk;
}

int cmd_decode(const ParamFlags& pf, const std::string& secret, const std::string& response, std::uint64_t index,
               std::uint64_t record_bytes, const std::string& out, const std::string& expected) {
  auto params = pf.make();
  SecretKey sk = deserialize_secret(read_file(secret), *params);
  PirResponse r = deserialize_response(read_file(response), *params);
  return decode_and_check(*params, sk, r, index, record_bytes, out, expected);
}

// serve / client

extern "C" void on_signal(int) { std::_Exit(0); }

struct ServeArgs {
  ParamFlags pf;
  std::string listen = "127.0.0.1:7700";
  std::string db;
  std::string window = "auto";
  std::size_t max_batch = 64;
  std::string role = "standalone";
  std::vector<std::string> peers;
  std::uint32_t worker_index = 0;
  std::uint32_t workers = 1;
  std::size_t threads = 0;
  std::string port_file;
};

int cmd_serve(const ServeArgs& a) {
  service::ServerConfig c;
  c.params = a.pf.make();
  c.listen = service::Endpoint::parse(a.listen);
  c.db_path = a.db;
  c.window = service::WindowPolicy::parse(a.window);
  c.max_batch = a.max_batch;
  c.role = service::parse_role(a.role);
  for (auto& p : a.peers) c.peers.push_back(service::Endpoint::parse(p));
  c.worker_index = a.worker_index;
  c.workers = a.workers;
  if (a.threads) c.width = a.threads;
  service::PirServer server(c);
  server.start();
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  nlohmann::ordered_json j;
  j["cmd"] = "serve";
  j["role"] = a.role;
  j["port"] = server.port();
  j["window_seconds"] = server.window().count();
  j["params"] = c.params->describe();
  emit(j);
  if (!a.port_file.empty()) {
    std::string tmp = a.port_file + ".tmp";
    std::ofstream(tmp) << server.port() << "\n";
    fs::rename(tmp, a.port_file);
  }
  server.wait();
  return kOk;
}

struct ClientArgs {
  ParamFlags pf;
  std::string connect;
  std::string secret;
  std::string bundle;
  std::uint64_t index = 0;
  std::uint64_t record_bytes = 0;
  std::uint64_t client_id = 1;
  std::uint64_t seed = 1;
  std::string out;
  std::string out_record;
  std::string expected;
};

int cmd_client(const ClientArgs& a) {
  auto params = a.pf.make();
  SecretKey sk = deserialize_secret(read_file(a.secret), *params);
  KeyBundle kb = deserialize_bundle(read_file(a.bundle), *params);
  RecordLocator loc = locate_checked(*params, a.record_bytes, a.index);
  Prng rng(a.seed);
  PirQuery q = build_query(sk, loc.poly, *params, rng);
  service::ServiceClient sc(service::Endpoint::parse(a.connect), params);
  sc.upload_keys(a.client_id, kb);
  PirResponse r = sc.query(a.client_id, a.seed, q);
  if (!a.out.empty()) write_file(a.out, serialize_response(r, *params));
  if (!a.out_record.empty() || !a.expected.empty())
    return decode_and_check(*params, sk, r, a.index, a.record_bytes, a.out_record, a.expected);
  nlohmann::ordered_json j;
  j["cmd"] = "client";
  j["index"] = a.index;
  j["response"] = a.out;
  emit(j);
  return kOk;
}

// bench

struct BenchArgs {
  ParamFlags pf;
  std::vector<std::size_t> batches{1, 8, 64};
  std::vector<std::uint32_t> ds;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  std::string format = "both";
};

int cmd_bench(const BenchArgs& a) {
  auto base = a.pf.make();
  std::vector<std::uint32_t> ds = a.ds.empty() ? std::vector<std::uint32_t>{base->d()} : a.ds;
  const std::size_t width = a.threads ? a.threads : default_parallelism();
  std::vector<nlohmann::ordered_json> rows;
  for (std::uint32_t d : ds) {
    ParamFlags pf = a.pf;
    pf.d = d;
    auto params = pf.make();
    const std::uint64_t rb = params->poly_payload_bytes();
    const std::uint64_t seed = a.seed;
    DatabaseImage db = preprocess_db(params, rb, params->total_polys(),
                                     [seed](std::uint64_t i, std::span<std::uint8_t> out) { synthetic_record(seed, i, out); },
                                     width);
    PirClient client(params, a.seed);
    KeyBundle kb = client.bundle();
    std::size_t max_b = *std::max_element(a.batches.begin(), a.batches.end());
    std::vector<PirQuery> qs;
    for (std::size_t i = 0; i < max_b; ++i) qs.push_back(client.query_poly((i * 7919) % params->total_polys()));
    for (std::size_t b : a.batches) {
      std::vector<BatchItem> items;
      for (std::size_t i = 0; i < b; ++i) items.push_back({&qs[i], &kb});
      ScanCounters sc;
      auto t0 = service::Clock::now();
      auto out = answer_batch(db, items, &sc, width);
      double secs = service::Seconds(service::Clock::now() - t0).count();
      nlohmann::ordered_json j;
      j["cmd"] = "bench";
      j["d"] = d;
      j["batch"] = b;
      j["db_scan_bytes"] = sc.db_bytes;
      j["db_scan_bytes_per_query"] = sc.db_bytes_per_query();
      j["client_bytes_per_query"] = sc.client_bytes_per_query();
      j["seconds"] = secs;
      j["qps"] = double(b) / secs;
      j["latency_seconds"] = secs;
      rows.push_back(j);
    }
  }
  if (a.format != "jsonl") {
    std::printf("%4s %6s %16s %18s %12s %10s\n", "d", "batch", "scan_B/query", "client_B/query", "seconds", "qps");
    for (auto& j : rows)
      std::printf("%4u %6zu %16.0f %18.0f %12.4f %10.3f\n", j["d"].get<unsigned>(), j["batch"].get<std::size_t>(),
                  j["db_scan_bytes_per_query"].get<double>(), j["client_bytes_per_query"].get<double>(),
                  j["seconds"].get<double>(), j["qps"].get<double>());
  }
  if (a.format != "text")
    for (auto& j : rows) emit(j);
  return kOk;
}

// schedreport

struct SchedArgs {
  std::string policy = "all";
  std::string depth = "auto";
  double capacity = 32.0 * 5 * 1024 * 1024;
  std::uint32_t batch = 32;
  double db_bytes = 8.0 * (1ull << 30);
  std::string tree = "all";
  std::optional<std::uint32_t> levels;
  std::uint32_t n = 4096, moduli = 4, ell = 5, d0 = 256, word_bits = 28, p_bits = 32;
  std::string format = "both";
};

int cmd_schedreport(const SchedArgs& a) {
  using namespace ive::sched;
  SchedConfig cfg;
  cfg.n = a.n;
  cfg.num_moduli = a.moduli;
  cfg.ell = a.ell;
  cfg.d0 = a.d0;
  cfg.word_bits = a.word_bits;
  cfg.plaintext_bits = a.p_bits;
  cfg.batch = a.batch;
  cfg.d = SchedConfig::dims_for_db(a.db_bytes, cfg.n, cfg.d0, cfg.plaintext_bits);
  MemModel mem = MemModel::from(cfg, a.capacity, a.batch);
  std::uint32_t depth = 0;
  if (a.depth != "auto") {
    try {
      depth = static_cast<std::uint32_t>(std::stoul(a.depth));
    } catch (const std::exception&) {
      throw UsageError("depth must be a number or 'auto'");
    }
    if (depth == 0) throw UsageError("depth must be positive");
  }
  std::vector<Strategy> strategies;
  if (a.policy == "all")
    strategies = {Strategy::BFS, Strategy::DFS, Strategy::HS_BFS, Strategy::HS_DFS, Strategy::HS_DFS_RO};
  else
    strategies = {Strategy::BFS, parse_strategy(a.policy)};
  if (strategies.size() == 2 && strategies[1] == Strategy::BFS) strategies.pop_back();

  std::vector<std::pair<std::string, std::vector<TrafficReport>>> sections;
  auto run_tree = [&](TreeKind t, const std::string& name) {
    std::uint32_t lv = a.levels ? *a.levels : (t == TreeKind::Expand ? cfg.m() : cfg.d);
    OpGraph g = build_tree(t, lv, cfg.batch);
    std::vector<TrafficReport> reps;
    for (auto s : strategies) {
      auto r = simulate_traffic(g, {s, depth}, mem);
      r.executed.clear();
      reps.push_back(std::move(r));
    }
    sections.push_back({name, std::move(reps)});
  };
  if (a.tree == "all" || a.tree == "expand") run_tree(TreeKind::Expand, "expand");
  if (a.tree == "all" || a.tree == "coltor") run_tree(TreeKind::ColTor, "coltor");
  if (a.tree == "all" && !a.levels) {
    std::vector<TrafficReport> reps;
    for (auto s : strategies) reps.push_back(pipeline_report(cfg, {s, depth}, mem));
    for (auto& r : reps) r.executed.clear();
    sections.push_back({"pipeline", std::move(reps)});
  }
  if (a.format != "jsonl") {
    std::printf("# d=%u m=%u batch=%u capacity=%.0f per_query=%.0f ct_bfv=%llu ct_rgsw=%llu evk=%llu\n", cfg.d,
                cfg.m(), cfg.batch, mem.capacity, mem.per_query(), (unsigned long long)mem.ct_bfv,
                (unsigned long long)mem.ct_rgsw, (unsigned long long)mem.evk);
    for (auto& [name, reps] : sections) std::printf("## %s\n%s", name.c_str(), report_text(reps).c_str());
  }
  if (a.format != "text")
    for (auto& [name, reps] : sections) {
      std::istringstream in(report_jsonl(reps));
      std::string line;
      while (std::getline(in, line)) {
        auto j = nlohmann::ordered_json::parse(line);
        nlohmann::ordered_json out;
        out["cmd"] = "schedreport";
        out["section"] = name;
        for (auto& [k, v] : j.items()) out[k] = v;
        emit(out);
      }
    }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IVE-PIR command line"};
  app.require_subcommand(1);

  DbgenArgs dg;
  auto* dbgen = app.add_subcommand("dbgen", "build a preprocessed database image");
  dg.pf.add(dbgen);
  dbgen->add_option("--out", dg.out, "image path")->required();
  auto* rd = dbgen->add_option("--records-dir", dg.records_dir, "directory of record files (sorted by name)");
  auto* syn = dbgen->add_option("--synthetic", dg.synthetic, "number of synthetic records");
  rd->excludes(syn);
  dbgen->add_option("--record-bytes", dg.record_bytes, "record size (default: one polynomial payload)");
  dbgen->add_option("--seed", dg.seed, "synthetic generator seed");

  ParamFlags kg_pf;
  std::string kg_secret, kg_bundle;
  std::uint64_t kg_seed = 1;
  auto* kg = app.add_subcommand("keygen", "generate a client key set");
  kg_pf.add(kg);
  kg->add_option("--secret", kg_secret, "secret key output")->required();
  kg->add_option("--bundle", kg_bundle, "public key bundle output")->required();
  kg->add_option("--seed", kg_seed, "key seed");

  ParamFlags q_pf;
  std::string q_secret, q_out;
  std::uint64_t q_index = 0, q_rb = 0, q_seed = 1;
  auto* qc = app.add_subcommand("query", "encrypt a query for a record index");
  q_pf.add(qc);
  qc->add_option("--secret", q_secret)->required();
  qc->add_option("--index", q_index, "record index")->required();
  qc->add_option("--record-bytes", q_rb);
  qc->add_option("--out", q_out)->required();
  qc->add_option("--seed", q_seed, "encryption randomness seed");

  ParamFlags an_pf;
  std::string an_db, an_query, an_bundle, an_out;
  auto* an = app.add_subcommand("answer", "answer a query file locally");
  an_pf.add(an);
  an->add_option("--db", an_db)->required();
  an->add_option("--query", an_query)->required();
  an->add_option("--bundle", an_bundle)->required();
  an->add_option("--out", an_out)->required();

  ParamFlags de_pf;
  std::string de_secret, de_resp, de_out, de_expected;
  std::uint64_t de_index = 0, de_rb = 0;
  auto* de = app.add_subcommand("decode", "decrypt a response and extract the record");
  de_pf.add(de);
  de->add_option("--secret", de_secret)->required();
  de->add_option("--response", de_resp)->required();
  de->add_option("--index", de_index)->required();
  de->add_option("--record-bytes", de_rb);
  de->add_option("--out", de_out, "record output");
  de->add_option("--expected", de_expected, "file the record must match");

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "run the batching server");
  sv.pf.add(serve);
  serve->add_option("--listen", sv.listen, "host:port (port 0 picks one)");
  serve->add_option("--db", sv.db, "database image");
  serve->add_option("--window", sv.window, "'auto' or a duration such as 20ms");
  serve->add_option("--max-batch", sv.max_batch);
  serve->add_option("--role", sv.role)->check(CLI::IsMember({"standalone", "coordinator", "worker"}));
  serve->add_option("--peers", sv.peers, "worker addresses in row order")->delimiter(',');
  serve->add_option("--worker-index", sv.worker_index);
  serve->add_option("--workers", sv.workers);
  serve->add_option("--threads", sv.threads);
  serve->add_option("--port-file", sv.port_file, "write the bound port here once listening");

  ClientArgs cl;
  auto* client = app.add_subcommand("client", "upload keys, send one query, receive the response");
  cl.pf.add(client);
  client->add_option("--connect", cl.connect, "server host:port")->required();
  client->add_option("--secret", cl.secret)->required();
  client->add_option("--bundle", cl.bundle)->required();
  client->add_option("--index", cl.index)->required();
  client->add_option("--record-bytes", cl.record_bytes);
  client->add_option("--client-id", cl.client_id);
  client->add_option("--seed", cl.seed);
  client->add_option("--out", cl.out, "response output");
  client->add_option("--out-record", cl.out_record, "decoded record output");
  client->add_option("--expected", cl.expected, "file the record must match");

  BenchArgs be;
  auto* bench = app.add_subcommand("bench", "batch-size and depth sweeps");
  be.pf.add(bench);
  bench->add_option("--batches", be.batches)->delimiter(',');
  bench->add_option("--ds", be.ds, "values of d")->delimiter(',');
  bench->add_option("--seed", be.seed);
  bench->add_option("--threads", be.threads);
  bench->add_option("--format", be.format)->check(CLI::IsMember({"text", "jsonl", "both"}));

  SchedArgs sa;
  auto* sched = app.add_subcommand("schedreport", "DRAM traffic of scheduling policies");
  sched->add_option("--policy", sa.policy, "BFS, DFS, HS_BFS, HS_DFS, HS_DFS_RO or all");
  sched->add_option("--depth", sa.depth, "subtree depth or auto");
  sched->add_option("--capacity", sa.capacity, "pooled on-chip bytes");
  sched->add_option("--batch", sa.batch);
  sched->add_option("--db-bytes", sa.db_bytes, "raw database bytes");
  sched->add_option("--tree", sa.tree)->check(CLI::IsMember({"expand", "coltor", "all"}));
  sched->add_option("--levels", sa.levels, "tree height instead of the DB-derived one");
  sched->add_option("--n", sa.n);
  sched->add_option("--moduli", sa.moduli);
  sched->add_option("--ell", sa.ell);
  sched->add_option("--d0", sa.d0);
  sched->add_option("--format", sa.format)->check(CLI::IsMember({"text", "jsonl", "both"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*dbgen) return cmd_dbgen(dg);
    if (*kg) return cmd_keygen(kg_pf, kg_secret, kg_bundle, kg_seed);
    if (*qc) return cmd_query(q_pf, q_secret, q_index, q_rb, q_out, q_seed);
    if (*an) return cmd_answer(an_pf, an_db, an_query, an_bundle, an_out);
    if (*de) return cmd_decode(de_pf, de_secret, de_resp, de_index, de_rb, de_out, de_expected);
    if (*serve) return cmd_serve(sv);
    if (*client) return cmd_client(cl);
    if (*bench) return cmd_bench(be);
    if (*sched) return cmd_schedreport(sa);
  } catch (const CliExit& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const service::RemoteError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == service::ErrorCode::ParamsMismatch ? kMismatch : kProtocol;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMismatch;
  } catch (const ProtocolError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kProtocol;
  } catch (const service::NetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kProtocol;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kUsage;
}
