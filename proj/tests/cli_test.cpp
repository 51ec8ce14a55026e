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


#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>

#include <gtest/gtest.h>

#include "json.hpp"

#include "ive/pir/database.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int rc;
  std::string out;
};

Run run(const std::string& args) {
  std::string cmd = std::string(IVE_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = ::popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  int st = ::pclose(p);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::vector<nlohmann::json> jsonl(const std::string& s) {
  std::vector<nlohmann::json> v;
  std::istringstream in(s);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] == '{') v.push_back(nlohmann::json::parse(line));
  return v;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("ive_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  // Small grid: D0 = 16, d = 3.
  const std::string params_ = "--d0 16 --d 3";
  fs::path dir_;
};

void write_bytes(const std::string& path, const ive::Bytes& b) {
  std::ofstream(path, std::ios::binary).write(reinterpret_cast<const char*>(b.data()), std::streamsize(b.size()));
}

TEST_F(Cli, RecordsDirectoryEndToEnd) {
  fs::create_directories(p("recs"));
  std::vector<ive::Bytes> recs;
  for (int i = 0; i < 40; ++i) {
    ive::Bytes b(200 + i);
    ive::synthetic_record(77, i, b);
    char name[32];
    std::snprintf(name, sizeof name, "r%03d", i);
    write_bytes(p("recs/") + name, b);
    recs.push_back(b);
  }
  ASSERT_EQ(run("dbgen " + params_ + " --records-dir " + p("recs") + " --record-bytes 256 --out " + p("db.img")).rc, 0);
  ASSERT_EQ(run("keygen " + params_ + " --secret " + p("sk") + " --bundle " + p("kb")).rc, 0);
  for (int idx : {0, 13, 39}) {
    std::string want = p("want");
    ive::Bytes padded = recs[idx];
    padded.resize(256);
    write_bytes(want, padded);
    ASSERT_EQ(run("query " + params_ + " --secret " + p("sk") + " --index " + std::to_string(idx) +
                  " --record-bytes 256 --out " + p("q"))
                  .rc,
              0);
    ASSERT_EQ(run("answer " + params_ + " --db " + p("db.img") + " --query " + p("q") + " --bundle " + p("kb") +
                  " --out " + p("r"))
                  .rc,
              0);
    auto d = run("decode " + params_ + " --secret " + p("sk") + " --response " + p("r") + " --index " +
                 std::to_string(idx) + " --record-bytes 256 --expected " + want + " --out " + p("got"));
    EXPECT_EQ(d.rc, 0) << d.out;
    EXPECT_TRUE(jsonl(d.out).at(0)["matches_expected"].get<bool>());
  }
  // Record 13 checked against record 0's bytes fails verification.
  ive::Bytes other = recs[0];
  other.resize(256);
  write_bytes(p("other"), other);
  EXPECT_EQ(run("decode " + params_ + " --secret " + p("sk") + " --response " + p("r") +
                " --index 39 --record-bytes 256 --expected " + p("other"))
                .rc,
            5);
}

TEST_F(Cli, OversizedRecordRejected) {
  fs::create_directories(p("recs"));
  write_bytes(p("recs/a"), ive::Bytes(300));
  EXPECT_EQ(run("dbgen " + params_ + " --records-dir " + p("recs") + " --record-bytes 256 --out " + p("db.img")).rc, 2);
  EXPECT_NE(run("dbgen " + params_ + " --synthetic 4 --out /nonexistent-dir/db.img").rc, 0);
}

TEST_F(Cli, EmptyInputAndDeterministicDigest) {
  fs::create_directories(p("empty"));
  auto e = run("dbgen " + params_ + " --records-dir " + p("empty") + " --out " + p("z.img"));
  ASSERT_EQ(e.rc, 0);
  auto ej = jsonl(e.out).at(0);
  EXPECT_EQ(ej["records"].get<int>(), 0);
  EXPECT_EQ(ej["polys"].get<int>(), 16 * 8);
  auto a = jsonl(run("dbgen " + params_ + " --synthetic 50 --seed 3 --out " + p("a.img")).out).at(0);
  auto b = jsonl(run("dbgen " + params_ + " --synthetic 50 --seed 3 --out " + p("b.img")).out).at(0);
  auto c = jsonl(run("dbgen " + params_ + " --synthetic 50 --seed 4 --out " + p("c.img")).out).at(0);
  EXPECT_EQ(a["digest"], b["digest"]);
  EXPECT_NE(a["digest"], c["digest"]);
}

TEST_F(Cli, SyntheticSixteenKilobyteRecordsExpansionFactor) {
  // Table 1 ring: one 16KB record per polynomial.
  auto r = run("dbgen --profile table1 --d0 16 --d 4 --synthetic 256 --record-bytes 16384 --out " + p("t.img"));
  ASSERT_EQ(r.rc, 0);
  auto j = jsonl(r.out).at(0);
  EXPECT_EQ(j["polys"].get<int>(), 256);
  EXPECT_LT(j["expansion_factor"].get<double>(), 3.5);
}

TEST_F(Cli, QueryDeterministicAndWrongKeyFlagged) {
  ASSERT_EQ(run("dbgen " + params_ + " --synthetic 128 --out " + p("db.img")).rc, 0);
  ASSERT_EQ(run("keygen " + params_ + " --seed 5 --secret " + p("sk") + " --bundle " + p("kb")).rc, 0);
  ASSERT_EQ(run("keygen " + params_ + " --seed 6 --secret " + p("sk2") + " --bundle " + p("kb2")).rc, 0);
  ASSERT_EQ(run("query " + params_ + " --secret " + p("sk") + " --index 9 --seed 1 --out " + p("q1")).rc, 0);
  ASSERT_EQ(run("query " + params_ + " --secret " + p("sk") + " --index 9 --seed 1 --out " + p("q2")).rc, 0);
  EXPECT_EQ(ive::read_file(p("q1")), ive::read_file(p("q2")));
  ASSERT_EQ(run("answer " + params_ + " --db " + p("db.img") + " --query " + p("q1") + " --bundle " + p("kb") +
                " --out " + p("r"))
                .rc,
            0);
  EXPECT_EQ(run("decode " + params_ + " --secret " + p("sk") + " --response " + p("r") + " --index 9").rc, 0);
  auto bad = run("decode " + params_ + " --secret " + p("sk2") + " --response " + p("r") + " --index 9");
  EXPECT_EQ(bad.rc, 5);
  EXPECT_TRUE(jsonl(bad.out).at(0)["exhausted"].get<bool>());
}

TEST_F(Cli, UsageAndMismatchExitCodes) {
  EXPECT_EQ(run("").rc, 2);
  EXPECT_EQ(run("frobnicate").rc, 2);
  EXPECT_EQ(run("keygen --secret x").rc, 2);
  EXPECT_EQ(run("dbgen --d0 16 --d 3 --log2-z 30 --synthetic 1 --out " + p("x")).rc, 2);
  ASSERT_EQ(run("keygen " + params_ + " --secret " + p("sk") + " --bundle " + p("kb")).rc, 0);
  EXPECT_EQ(run("query " + params_ + " --secret " + p("sk") + " --index 100000 --out " + p("q")).rc, 2);
  EXPECT_EQ(run("query --d0 16 --d 2 --secret " + p("sk") + " --index 1 --out " + p("q")).rc, 3);
}

TEST_F(Cli, ServeAndClientRoundTrip) {
  ASSERT_EQ(run("dbgen " + params_ + " --synthetic 128 --seed 8 --out " + p("db.img")).rc, 0);
  ASSERT_EQ(run("keygen " + params_ + " --secret " + p("sk") + " --bundle " + p("kb")).rc, 0);
  std::string cmd = std::string(IVE_CLI_PATH) + " serve " + params_ + " --listen 127.0.0.1:0 --window 5ms --threads 1" +
                    " --db " + p("db.img") + " --port-file " + p("port") + " > " + p("serve.log") +
                    " 2>&1 & echo $!";
  FILE* f = ::popen(cmd.c_str(), "r");
  int pid = 0;
  ASSERT_EQ(std::fscanf(f, "%d", &pid), 1);
  ::pclose(f);
  std::string port;
  for (int i = 0; i < 600 && port.empty(); ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    std::ifstream in(p("port"));
    in >> port;
  }
  ASSERT_FALSE(port.empty());
  ive::Bytes want(ive::PirParams::profile("test")->poly_payload_bytes());
  ive::synthetic_record(8, 77, want);
  write_bytes(p("want"), want);
  auto c = run("client " + params_ + " --connect 127.0.0.1:" + port + " --secret " + p("sk") + " --bundle " + p("kb") +
               " --index 77 --out " + p("resp") + " --expected " + p("want"));
  EXPECT_EQ(c.rc, 0) << c.out;
  EXPECT_TRUE(fs::exists(p("resp")));
  auto m = run("client --d0 16 --d 2 --connect 127.0.0.1:" + port + " --secret " + p("sk") + " --bundle " + p("kb") +
               " --index 1");
  EXPECT_EQ(m.rc, 3);
  EXPECT_EQ(run("client " + params_ + " --connect 127.0.0.1:1 --secret " + p("sk") + " --bundle " + p("kb") +
                " --index 1")
                .rc,
            4);
  ::kill(pid, SIGTERM);
}

TEST_F(Cli, BenchScanBytesPerQueryNonincreasing) {
  auto r = run("bench --d0 16 --d 2 --batches 1,8,64 --threads 1 --format jsonl");
  ASSERT_EQ(r.rc, 0);
  auto rows = jsonl(r.out);
  ASSERT_EQ(rows.size(), 3u);
  double prev = 1e300;
  for (auto& j : rows) {
    double v = j["db_scan_bytes_per_query"].get<double>();
    EXPECT_LE(v, prev);
    prev = v;
    EXPECT_NEAR(v * j["batch"].get<double>(), rows[0]["db_scan_bytes"].get<double>(), 1e-6);
  }
}

TEST_F(Cli, SchedReportDepthTwoRatio) {
  auto r = run("schedreport --tree coltor --levels 2 --depth 2 --policy HS_DFS --batch 1 --format jsonl");
  ASSERT_EQ(r.rc, 0);
  std::map<std::string, double> ct;
  for (auto& j : jsonl(r.out))
    if (j["stage"] == "all") ct[j["policy"]] = j["ct_bfv_load"].get<double>() + j["ct_bfv_store"].get<double>();
  ASSERT_EQ(ct.size(), 2u);
  EXPECT_DOUBLE_EQ(ct["HS_DFS"] * 9, ct["BFS"] * 5);
  auto t = run("schedreport --tree coltor --levels 2 --depth 2 --policy HS_DFS --batch 1 --format text");
  EXPECT_NE(t.out.find("0.5556"), std::string::npos);
  auto full = run("schedreport");
  EXPECT_EQ(full.rc, 0);
  EXPECT_EQ(full.out, run("schedreport").out);
  EXPECT_EQ(run("schedreport --policy NOPE").rc, 2);
}

}  // namespace
