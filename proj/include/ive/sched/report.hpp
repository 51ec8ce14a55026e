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

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ive/sched/simulate.hpp"

namespace ive::sched {

/// Expand, RowSel and ColTor under one policy, merged into a single report.
/// Each tree gets its own auto depth; `depth` in the result is the ColTor one.
inline TrafficReport pipeline_report(const SchedConfig& cfg, const SchedulePolicy& policy, const MemModel& mem) {
  Graphs g = build_graphs(cfg);
  TrafficReport ex = simulate_traffic(g.expand, policy, mem);
  TrafficReport col = simulate_traffic(g.coltor, policy, mem);
  TrafficReport out;
  out.policy = col.policy;
  out.depth = col.depth;
  out.peak_bytes = std::max(ex.peak_bytes, col.peak_bytes);
  out.stages["expand"] = ex.stages["expand"];
  out.stages["rowsel"] = rowsel_traffic(cfg, mem);
  out.stages["coltor"] = col.stages["coltor"];
  return out;
}

/// Line-delimited JSON: one record per (policy, stage) plus one per policy total.
inline std::string report_jsonl(const std::vector<TrafficReport>& reports) {
  std::ostringstream os;
  auto put = [&](const TrafficReport& r, const std::string& stage, const StageTraffic& t) {
    nlohmann::ordered_json j;
    j["policy"] = r.policy;
    j["depth"] = r.depth;
    j["stage"] = stage;
    for (int c = 0; c < kNumCategories; ++c) {
      j[std::string(kCategoryNames[c]) + "_load"] = t.loads[c];
      j[std::string(kCategoryNames[c]) + "_store"] = t.stores[c];
    }
    j["total"] = t.total();
    j["peak_onchip"] = r.peak_bytes;
    os << j.dump() << '\n';
  };
  for (auto& r : reports) {
    for (auto& [stage, t] : r.stages) put(r, stage, t);
    put(r, "all", r.totals());
  }
  return os.str();
}

/// Policy comparison table; vs_first is first / row over all bytes, ct_ratio is
/// row / first over ct_bfv bytes.
inline std::string report_text(const std::vector<TrafficReport>& reports) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %5s %12s %12s %12s %12s %12s %14s %8s %8s\n", "policy", "depth", "evk",
                "rgsw", "ct_bfv", "db", "temp", "total", "vs_first", "ct_ratio");
  os << line;
  const double base = reports.empty() ? 0.0 : double(reports.front().total());
  const double base_ct = reports.empty() ? 0.0 : double(reports.front().totals().category(kCt));
  for (auto& r : reports) {
    StageTraffic t = r.totals();
    double ratio = t.total() ? base / double(t.total()) : 0.0;
    double ct_ratio = t.category(kCt) ? double(t.category(kCt)) / base_ct : 0.0;
    std::snprintf(line, sizeof line, "%-10s %5u %12llu %12llu %12llu %12llu %12llu %14llu %8.3f %8.4f\n", r.policy.c_str(),
                  r.depth, (unsigned long long)t.category(kEvk), (unsigned long long)t.category(kRgsw),
                  (unsigned long long)t.category(kCt), (unsigned long long)t.category(kDb),
                  (unsigned long long)t.category(kTemp), (unsigned long long)t.total(), ratio, ct_ratio);
    os << line;
  }
  return os.str();
}

}  // namespace ive::sched
