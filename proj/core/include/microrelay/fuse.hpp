// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "microrelay/module.hpp"
#include "microrelay/registry.hpp"

namespace microrelay {

/// Dataflow DAG over the operator-call sites of one ANF block. Node indices
/// follow binding order (a topological order). Nodes whose value is
/// consumed by anything that is not an operator call in the same block
/// (the block result, control flow, nested functions, ...) carry an edge to
/// the virtual sink.
struct DataflowDag {
  struct Node {
    FusionPattern pattern = FusionPattern::Opaque;
    std::vector<size_t> consumers;  // node indices fed by this node
    bool extern_output = false;     // also flows to the virtual sink
  };
  std::vector<Node> nodes;
};

/// Result of the grouping analysis.
struct FusionGroups {
  static constexpr size_t kSink = static_cast<size_t>(-1);
  /// Per node: representative node index of its group (union-find root).
  std::vector<size_t> group_of;
  /// Per node: immediate post-dominator node index, or kSink.
  std::vector<size_t> ipdom;
};

/// Grouping engine: computes immediate post-dominators on the DAG plus the
/// virtual sink, then walks nodes in topological order applying the rules:
///   - a node joins its immediate post-dominator's group iff every path
///     between them consists of ops with pattern <= Injective;
///   - a group holds at most one ComplexOutFusable op;
///   - Reduction may anchor a group but never joins a downstream one;
///   - Opaque never fuses, in any position.
FusionGroups analyze_fusion_groups(const DataflowDag& dag,
                                   std::optional<int64_t> max_group_size = std::nullopt);

/// The fusion extraction pass: factors each fusion group into a local
/// function marked Primitive, with the group's free variables as
/// parameters, and rewrites call sites. Normalizes to ANF first.
ModuleEnv fuse_ops(const ModuleEnv& m, std::optional<int64_t> max_depth = std::nullopt);

}  // namespace microrelay
