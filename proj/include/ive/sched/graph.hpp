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
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ive/common/error.hpp"

namespace ive::sched {

enum class NodeKind : std::uint8_t { Subs, ExtProd, Add, Sub, NTT, iNTT, iCRT, Gemm, Load, Store };

inline const char* kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Subs: return "Subs";
    case NodeKind::ExtProd: return "ExtProd";
    case NodeKind::Add: return "Add";
    case NodeKind::Sub: return "Sub";
    case NodeKind::NTT: return "NTT";
    case NodeKind::iNTT: return "iNTT";
    case NodeKind::iCRT: return "iCRT";
    case NodeKind::Gemm: return "Gemm";
    case NodeKind::Load: return "Load";
    case NodeKind::Store: return "Store";
  }
  return "?";
}

enum class TreeKind : std::uint8_t { Expand, ColTor };

/// One tree position of one query. Expand nodes at level t (0 = root) split a
/// ciphertext with Subs; ColTor nodes at level t (1 = next to the leaves)
/// merge a pair with an external product.
struct OpNode {
  NodeKind kind;
  std::uint32_t query;
  std::uint32_t depth;
  std::uint64_t index;
  std::vector<std::uint64_t> operands;  // object ids
};

struct OpGraph {
  TreeKind tree = TreeKind::Expand;
  std::uint32_t levels = 0;
  std::uint32_t batch = 0;
  std::vector<OpNode> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  std::uint64_t count(NodeKind k, std::uint32_t depth) const {
    return static_cast<std::uint64_t>(std::count_if(nodes.begin(), nodes.end(), [&](const OpNode& n) {
      return n.kind == k && n.depth == depth;
    }));
  }
  std::uint64_t count(NodeKind k) const {
    return static_cast<std::uint64_t>(
        std::count_if(nodes.begin(), nodes.end(), [&](const OpNode& n) { return n.kind == k; }));
  }
  bool empty() const { return nodes.empty(); }
};

/// Object ids: ciphertext slots, keys and DB are distinct id spaces.
inline std::uint64_t ct_id(std::uint32_t query, std::uint32_t depth, std::uint64_t index) {
  return (std::uint64_t{query} << 48) | (std::uint64_t{depth} << 40) | index;
}
inline std::uint64_t key_id(std::uint32_t query, std::uint32_t depth) {
  return (std::uint64_t{1} << 63) | (std::uint64_t{query} << 48) | depth;
}

/// Expand: levels m, 2^t Subs at level t, each followed by an Add and a Sub
/// that produce the two children. ColTor: levels d, 2^(d-t) ExtProd at level
/// t, each preceded by a Sub (c1 - c0) and followed by an Add (+ c0).
inline OpGraph build_tree(TreeKind tree, std::uint32_t levels, std::uint32_t batch) {
  OpGraph g;
  g.tree = tree;
  g.levels = levels;
  g.batch = batch;
  if (levels > 30) throw UsageError("tree too deep for the traffic model");
  for (std::uint32_t q = 0; q < batch; ++q) {
    std::vector<std::size_t> prev_out;  // output node per position of the previous level
    if (tree == TreeKind::Expand) {
      for (std::uint32_t t = 0; t < levels; ++t) {
        std::vector<std::size_t> out(std::size_t{1} << (t + 1));
        for (std::uint64_t k = 0; k < (std::uint64_t{1} << t); ++k) {
          std::uint64_t in = ct_id(q, t, k);
          std::size_t s = g.nodes.size();
          g.nodes.push_back({NodeKind::Subs, q, t, k, {in, key_id(q, t)}});
          g.nodes.push_back({NodeKind::Add, q, t, k, {in}});
          g.nodes.push_back({NodeKind::Sub, q, t, k, {in}});
          g.edges.push_back({s, s + 1});
          g.edges.push_back({s, s + 2});
          if (t > 0) g.edges.push_back({prev_out[k], s});
          out[k] = s + 1;
          out[k + (std::uint64_t{1} << t)] = s + 2;
        }
        prev_out = std::move(out);
      }
    } else {
      for (std::uint32_t t = 1; t <= levels; ++t) {
        std::vector<std::size_t> out(std::size_t{1} << (levels - t));
        for (std::uint64_t k = 0; k < out.size(); ++k) {
          std::uint64_t c0 = ct_id(q, t - 1, 2 * k), c1 = ct_id(q, t - 1, 2 * k + 1);
          std::size_t s = g.nodes.size();
          g.nodes.push_back({NodeKind::Sub, q, t, k, {c1, c0}});
          g.nodes.push_back({NodeKind::ExtProd, q, t, k, {c1, key_id(q, t)}});
          g.nodes.push_back({NodeKind::Add, q, t, k, {c0}});
          g.edges.push_back({s, s + 1});
          g.edges.push_back({s + 1, s + 2});
          if (t > 1) {
            g.edges.push_back({prev_out[2 * k], s});
            g.edges.push_back({prev_out[2 * k + 1], s});
          }
          out[k] = s + 2;
        }
        prev_out = std::move(out);
      }
    }
  }
  return g;
}

/// Protocol dimensions that drive the traffic model.
struct SchedConfig {
  std::uint32_t n = 4096;
  std::uint32_t num_moduli = 4;
  std::uint32_t word_bits = 28;
  std::uint32_t ell = 5;
  std::uint32_t d0 = 256;
  std::uint32_t d = 11;
  std::uint32_t plaintext_bits = 32;
  std::uint32_t batch = 32;

  /// Expansion depth m = ceil(log2(D0 + d*ell)).
  std::uint32_t m() const {
    std::uint64_t slots = std::uint64_t{d0} + std::uint64_t{d} * ell;
    return slots <= 1 ? 0 : static_cast<std::uint32_t>(std::bit_width(slots - 1));
  }
  double poly_bytes() const { return double(num_moduli) * n * word_bits / 8; }
  std::uint64_t record_poly_count() const { return std::uint64_t{d0} << d; }

  /// d for a raw DB of `raw_bytes`, one plaintext polynomial per N*log2(P)/8 bytes.
  static std::uint32_t dims_for_db(double raw_bytes, std::uint32_t n, std::uint32_t d0, std::uint32_t p_bits) {
    double polys = std::ceil(raw_bytes / (double(n) * p_bits / 8));
    double rows = std::ceil(polys / d0);
    return rows <= 1 ? 0 : static_cast<std::uint32_t>(std::ceil(std::log2(rows)));
  }
};

struct Graphs {
  OpGraph expand;
  OpGraph coltor;
  double rowsel_db_bytes = 0;  // one scan per batch
};

inline Graphs build_graphs(const SchedConfig& cfg) {
  Graphs g;
  g.expand = build_tree(TreeKind::Expand, cfg.m(), cfg.batch);
  g.coltor = build_tree(TreeKind::ColTor, cfg.d, cfg.batch);
  g.rowsel_db_bytes = double(cfg.record_poly_count()) * cfg.poly_bytes();
  return g;
}

}  // namespace ive::sched
