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
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "ive/sched/graph.hpp"

namespace ive::sched {

/// On-chip memory and object sizes. Capacity is one pooled budget shared by
/// the queries that run concurrently, so each query sees capacity / concurrent.
struct MemModel {
  double capacity = 32.0 * 5 * 1024 * 1024;
  std::uint64_t ct_bfv = 0;
  std::uint64_t ct_rgsw = 0;
  std::uint64_t evk = 0;
  std::uint32_t ell = 5;
  std::uint32_t concurrent = 1;

  /// Sizes 2*4N, 2*2l*4N and 2*l*4N words of word_bits each.
  static MemModel from(const SchedConfig& cfg, double capacity, std::uint32_t concurrent) {
    MemModel m;
    const std::uint64_t poly = std::uint64_t{cfg.num_moduli} * cfg.n * cfg.word_bits / 8;
    m.capacity = capacity;
    m.ct_bfv = 2 * poly;
    m.ct_rgsw = 4 * std::uint64_t{cfg.ell} * poly;
    m.evk = 2 * std::uint64_t{cfg.ell} * poly;
    m.ell = cfg.ell;
    m.concurrent = concurrent;
    return m;
  }
  double per_query() const { return capacity / concurrent; }
  std::uint64_t key(TreeKind t) const { return t == TreeKind::Expand ? evk : ct_rgsw; }
};

enum class Strategy : std::uint8_t { BFS, DFS, HS_BFS, HS_DFS, HS_DFS_RO };

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::BFS: return "BFS";
    case Strategy::DFS: return "DFS";
    case Strategy::HS_BFS: return "HS_BFS";
    case Strategy::HS_DFS: return "HS_DFS";
    case Strategy::HS_DFS_RO: return "HS_DFS_RO";
  }
  return "?";
}

inline Strategy parse_strategy(const std::string& s) {
  for (Strategy x : {Strategy::BFS, Strategy::DFS, Strategy::HS_BFS, Strategy::HS_DFS, Strategy::HS_DFS_RO})
    if (s == strategy_name(x)) return x;
  throw UsageError("unknown scheduling policy '" + s + "'");
}

struct SchedulePolicy {
  Strategy strategy = Strategy::BFS;
  std::uint32_t depth = 0;  // subtree depth for HS strategies; 0 = derive from capacity
};

inline bool reduction_overlap(Strategy s) { return s == Strategy::HS_DFS_RO; }

/// Dcp temporaries: l ciphertexts, or nothing with reduction overlapping.
inline std::uint64_t temp_bytes(Strategy s, const MemModel& mem) {
  return reduction_overlap(s) ? 0 : std::uint64_t{mem.ell} * mem.ct_bfv;
}

/// Peak on-chip bytes for one query. HS_BFS keeps the 2^(D-1) outputs of the
/// widest level plus one streaming operand; the DFS forms keep one waiting
/// ciphertext per level plus the pair being combined.
inline std::uint64_t working_set(Strategy s, std::uint32_t depth, TreeKind tree, const MemModel& mem,
                                 std::uint32_t levels = 0) {
  const std::uint64_t key = mem.key(tree), c = mem.ct_bfv, t = temp_bytes(s, mem);
  switch (s) {
    case Strategy::BFS: return key + 2 * c + t;
    case Strategy::DFS: return key + (std::uint64_t{levels} + 1) * c + t;
    case Strategy::HS_BFS: return depth * key + ((std::uint64_t{1} << (depth - 1)) + 1) * c + t;
    case Strategy::HS_DFS:
    case Strategy::HS_DFS_RO: return depth * key + (std::uint64_t{depth} + 1) * c + t;
  }
  return 0;
}

inline bool is_hs(Strategy s) { return s == Strategy::HS_BFS || s == Strategy::HS_DFS || s == Strategy::HS_DFS_RO; }

/// Largest subtree depth (at most `levels`) whose working set fits the per-query capacity.
inline std::uint32_t max_subtree_depth(Strategy s, const MemModel& mem, TreeKind tree, std::uint32_t levels = 30) {
  const double cap = mem.per_query();
  if (s == Strategy::BFS || s == Strategy::DFS) {
    std::uint64_t need = working_set(s, 1, tree, mem, levels);
    if (need > cap)
      throw InfeasibleSchedule(std::string(strategy_name(s)) + " needs " + std::to_string(need) +
                               " bytes on chip per query, capacity is " + std::to_string(cap));
    return s == Strategy::BFS ? 1 : levels;
  }
  std::uint64_t need = working_set(s, 1, tree, mem);
  if (need > cap)
    throw InfeasibleSchedule("capacity " + std::to_string(static_cast<std::uint64_t>(cap)) +
                             " bytes per query is below the minimum " + std::to_string(need) +
                             " bytes for " + strategy_name(s));
  std::uint32_t d = 1;
  while (d < std::max<std::uint32_t>(levels, 1) && working_set(s, d + 1, tree, mem) <= cap) ++d;
  return d;
}

enum Category { kEvk, kRgsw, kCt, kDb, kTemp, kNumCategories };
inline constexpr std::array<const char*, kNumCategories> kCategoryNames = {"evk", "rgsw", "ct_bfv", "db", "temp"};

struct StageTraffic {
  std::array<std::uint64_t, kNumCategories> loads{};
  std::array<std::uint64_t, kNumCategories> stores{};
  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (int c = 0; c < kNumCategories; ++c) s += loads[c] + stores[c];
    return s;
  }
  std::uint64_t category(int c) const { return loads[c] + stores[c]; }
  StageTraffic& operator+=(const StageTraffic& o) {
    for (int c = 0; c < kNumCategories; ++c) {
      loads[c] += o.loads[c];
      stores[c] += o.stores[c];
    }
    return *this;
  }
};

/// Executed compute operation: (kind, query, depth, index).
using OpKey = std::tuple<NodeKind, std::uint32_t, std::uint32_t, std::uint64_t>;

struct TrafficReport {
  std::string policy;
  std::uint32_t depth = 0;
  std::uint64_t peak_bytes = 0;
  std::map<std::string, StageTraffic> stages;
  std::vector<OpKey> executed;

  StageTraffic totals() const {
    StageTraffic t;
    for (auto& [_, s] : stages) t += s;
    return t;
  }
  std::uint64_t total() const { return totals().total(); }
};

/// Resident-set tracker; throws as soon as the resident bytes exceed capacity.
class OnChip {
 public:
  explicit OnChip(double capacity) : cap_(capacity) {}
  void alloc(std::uint64_t bytes) {
    resident_ += bytes;
    peak_ = std::max(peak_, resident_);
    if (double(resident_) > cap_)
      throw InfeasibleSchedule("working set of " + std::to_string(resident_) + " bytes exceeds the on-chip capacity of " +
                               std::to_string(static_cast<std::uint64_t>(cap_)) + " bytes");
  }
  void free(std::uint64_t bytes) { resident_ -= bytes; }
  std::uint64_t resident() const { return resident_; }
  std::uint64_t peak() const { return peak_; }

 private:
  double cap_;
  std::uint64_t resident_ = 0;
  std::uint64_t peak_ = 0;
};

/// Partition of `levels` into subtree layers of `depth`, remainder on the root side.
/// Returned root first.
inline std::vector<std::uint32_t> layer_sizes(std::uint32_t levels, std::uint32_t depth) {
  std::vector<std::uint32_t> out;
  if (levels == 0) return out;
  depth = std::min(depth, levels);
  if (levels % depth) out.push_back(levels % depth);
  for (std::uint32_t i = 0; i < levels / depth; ++i) out.push_back(depth);
  return out;
}

namespace detail {

struct Sim {
  const MemModel& mem;
  Strategy strategy;
  TreeKind tree;
  std::uint32_t q;
  OnChip chip;
  StageTraffic traffic;
  std::vector<OpKey>* executed;
  int key_cat;

  Sim(const MemModel& m, Strategy s, TreeKind t, std::uint32_t query, std::vector<OpKey>* ex)
      : mem(m), strategy(s), tree(t), q(query), chip(m.per_query()), executed(ex),
        key_cat(t == TreeKind::Expand ? kEvk : kRgsw) {}

  std::uint64_t C() const { return mem.ct_bfv; }
  std::uint64_t K() const { return mem.key(tree); }
  std::uint64_t T() const { return temp_bytes(strategy, mem); }

  void load_ct() { traffic.loads[kCt] += C(); chip.alloc(C()); }
  void store_ct() { traffic.stores[kCt] += C(); chip.free(C()); }
  void load_key() { traffic.loads[key_cat] += K(); chip.alloc(K()); }
  void drop_key() { chip.free(K()); }

  // Expand node at level t, index k; the parent is resident. Leaves the two
  // children resident.
  void expand_node(std::uint32_t t, std::uint64_t k) {
    chip.alloc(T());
    chip.alloc(C());
    chip.free(T());
    executed->push_back({NodeKind::Subs, q, t, k});
    executed->push_back({NodeKind::Add, q, t, k});
    executed->push_back({NodeKind::Sub, q, t, k});
  }
  // ColTor node at level t, index k; both children resident, output replaces one.
  void coltor_node(std::uint32_t t, std::uint64_t k) {
    chip.alloc(T());
    executed->push_back({NodeKind::Sub, q, t, k});
    executed->push_back({NodeKind::ExtProd, q, t, k});
    executed->push_back({NodeKind::Add, q, t, k});
    chip.free(T());
    chip.free(C());
  }

  // Depth-first over an Expand subtree rooted at (t, k) with `rem` levels left.
  void expand_dfs(std::uint32_t t, std::uint64_t k, std::uint32_t rem, bool key_per_node) {
    if (rem == 0) {
      store_ct();
      return;
    }
    if (key_per_node) load_key();
    expand_node(t, k);
    if (key_per_node) drop_key();
    expand_dfs(t + 1, k, rem - 1, key_per_node);
    expand_dfs(t + 1, k + (std::uint64_t{1} << t), rem - 1, key_per_node);
  }

  // Level by level over an Expand subtree; the last level streams its children out.
  void expand_bfs(std::uint32_t t0, std::uint64_t k0, std::uint32_t depth) {
    std::vector<std::uint64_t> cur{k0};
    for (std::uint32_t j = 0; j < depth; ++j) {
      const std::uint32_t t = t0 + j;
      std::vector<std::uint64_t> next;
      for (auto k : cur) {
        expand_node(t, k);
        if (j + 1 == depth) {
          store_ct();
          store_ct();
        }
      }
      for (auto k : cur) next.push_back(k);
      for (auto k : cur) next.push_back(k + (std::uint64_t{1} << t));
      cur = std::move(next);
    }
  }

  // Depth-first over a ColTor subtree whose top node is (t, k), `h` levels tall.
  void coltor_dfs(std::uint32_t t, std::uint64_t k, std::uint32_t h, bool key_per_node) {
    if (h == 0) {
      load_ct();
      return;
    }
    coltor_dfs(t - 1, 2 * k, h - 1, key_per_node);
    coltor_dfs(t - 1, 2 * k + 1, h - 1, key_per_node);
    if (key_per_node) load_key();
    coltor_node(t, k);
    if (key_per_node) drop_key();
  }

  // Level by level: the bottom level streams pairs in, upper levels reuse resident outputs.
  void coltor_bfs(std::uint32_t t_top, std::uint64_t k_top, std::uint32_t h) {
    const std::uint32_t t_bottom = t_top - h + 1;
    const std::uint64_t width = std::uint64_t{1} << (h - 1);
    for (std::uint64_t i = 0; i < width; ++i) {
      load_ct();
      load_ct();
      coltor_node(t_bottom, k_top * width + i);
    }
    for (std::uint32_t t = t_bottom + 1; t <= t_top; ++t) {
      std::uint64_t w = std::uint64_t{1} << (t_top - t);
      for (std::uint64_t i = 0; i < w; ++i) coltor_node(t, k_top * w + i);
    }
  }
};

}  // namespace detail

/// Schedules every query of the graph under the policy and counts DRAM bytes
/// per category. Queries run one per capacity share; the resident set is
/// checked after every allocation.
inline TrafficReport simulate_traffic(const OpGraph& g, const SchedulePolicy& policy, const MemModel& mem) {
  TrafficReport rep;
  rep.policy = strategy_name(policy.strategy);
  const std::string stage = g.tree == TreeKind::Expand ? "expand" : "coltor";
  rep.stages[stage];
  if (g.batch == 0 || g.levels == 0) return rep;
  const Strategy s = policy.strategy;
  std::uint32_t depth;
  if (s == Strategy::BFS) depth = 1;
  else if (s == Strategy::DFS) depth = g.levels;
  else depth = policy.depth ? std::min(policy.depth, g.levels) : max_subtree_depth(s, mem, g.tree, g.levels);
  rep.depth = depth;
  const bool dfs_inside = s == Strategy::DFS || s == Strategy::HS_DFS || s == Strategy::HS_DFS_RO;

  for (std::uint32_t q = 0; q < g.batch; ++q) {
    detail::Sim sim(mem, s, g.tree, q, &rep.executed);
    auto layers = layer_sizes(g.levels, depth);
    if (s == Strategy::DFS) {
      if (g.tree == TreeKind::Expand) {
        sim.load_ct();
        sim.expand_dfs(0, 0, g.levels, true);
      } else {
        sim.coltor_dfs(g.levels, 0, g.levels, true);
        sim.store_ct();
      }
    } else if (g.tree == TreeKind::Expand) {
      std::uint32_t start = 0;
      for (auto h : layers) {
        for (std::uint32_t j = 0; j < h; ++j) sim.load_key();
        for (std::uint64_t k = 0; k < (std::uint64_t{1} << start); ++k) {
          sim.load_ct();
          if (dfs_inside) sim.expand_dfs(start, k, h, false);
          else sim.expand_bfs(start, k, h);
        }
        for (std::uint32_t j = 0; j < h; ++j) sim.drop_key();
        start += h;
      }
    } else {
      std::uint32_t done = 0;
      for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
        const std::uint32_t h = *it;
        const std::uint32_t top = done + h;
        for (std::uint32_t j = 0; j < h; ++j) sim.load_key();
        for (std::uint64_t k = 0; k < (std::uint64_t{1} << (g.levels - top)); ++k) {
          if (dfs_inside) sim.coltor_dfs(top, k, h, false);
          else sim.coltor_bfs(top, k, h);
          sim.store_ct();
        }
        for (std::uint32_t j = 0; j < h; ++j) sim.drop_key();
        done = top;
      }
    }
    rep.peak_bytes = std::max(rep.peak_bytes, sim.chip.peak());
    rep.stages[stage] += sim.traffic;
  }
  return rep;
}

/// RowSel: one DB scan per batch, plus D0 ciphertext reads and 2^d writes per query.
inline StageTraffic rowsel_traffic(const SchedConfig& cfg, const MemModel& mem) {
  StageTraffic t;
  t.loads[kDb] = static_cast<std::uint64_t>(double(cfg.record_poly_count()) * cfg.poly_bytes());
  t.loads[kCt] = std::uint64_t{cfg.batch} * cfg.d0 * mem.ct_bfv;
  t.stores[kCt] = std::uint64_t{cfg.batch} * (std::uint64_t{1} << cfg.d) * mem.ct_bfv;
  return t;
}

/// (2^D + 1) / (3 * 2^D - 3).
inline double hs_closed_form_ratio(std::uint32_t depth) {
  double p = std::ldexp(1.0, static_cast<int>(depth));
  return (p + 1) / (3 * p - 3);
}

/// Sorted multiset of (kind, query, depth, index) over the graph's nodes.
inline std::vector<OpKey> node_multiset(const OpGraph& g) {
  std::vector<OpKey> v;
  for (auto& n : g.nodes) v.push_back({n.kind, n.query, n.depth, n.index});
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace ive::sched
