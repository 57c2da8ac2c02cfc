// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Independent oracles the tests check the compiler against. Everything in
// here is implemented from first principles on plain integer vectors and
// adjacency lists; nothing calls into the compiler.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace oracle {

using Dims = std::vector<int64_t>;

// Right-aligned broadcasting: dims equal or 1.
std::optional<Dims> broadcast(const Dims& a, const Dims& b);

// out = (in - kernel + 2*pad) / stride + 1 per spatial dim; NCHW/OIHW.
std::optional<Dims> conv2d_nchw(const Dims& data, const Dims& weight, int64_t sh, int64_t sw,
                                int64_t ph, int64_t pw);

// (n, k) x (m, k) -> (n, m).
std::optional<Dims> dense(const Dims& data, const Dims& weight);

Dims reduce(const Dims& in, const std::vector<int64_t>& axes, bool keepdims);
Dims transpose(const Dims& in, const std::vector<int64_t>& axes);
Dims expand_dims(const Dims& in, int64_t axis);
std::optional<Dims> concat(const std::vector<Dims>& parts, int64_t axis);
Dims bias_add(const Dims& data);  // shape-preserving

// ---- post-dominator / fusion-group oracle ----------------------------------

struct DagNode {
  int pattern = 0;  // 0..5 mirrors the FusionPattern order
  std::vector<size_t> consumers;
  bool extern_output = false;
};

struct Dag {
  std::vector<DagNode> nodes;
};

inline constexpr size_t kSink = static_cast<size_t>(-1);

// Immediate post-dominators by explicit path enumeration: d post-dominates
// n iff every n->sink path contains d; the immediate one is the closest.
std::vector<size_t> brute_ipdom(const Dag& dag);

// The grouping rules, re-derived independently: walk nodes in topological
// order; a node joins its immediate post-dominator's group iff every path
// between them consists of ops with pattern <= Injective (2); at most one
// ComplexOutFusable (4) per group; Reduction (3) may anchor but never
// joins; Opaque (5) never fuses. Returns the anchor node of each node's
// group.
std::vector<size_t> brute_groups(const Dag& dag);

}  // namespace oracle
