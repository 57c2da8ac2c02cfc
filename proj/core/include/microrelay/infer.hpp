// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "microrelay/module.hpp"
#include "microrelay/registry.hpp"

namespace microrelay {

/// Instrumentation record of one solver run (attach via infer()). Relations
/// are numbered in generation order.
struct SolverTrace {
  /// Relation ids in dequeue order.
  std::vector<int> dequeued;
  /// Relation ids in discharge order.
  std::vector<int> discharged;
  /// For every processing step, the queue contents (relation ids, front
  /// first) after the step completed.
  std::vector<std::vector<int>> queue_snapshots;
  /// For every assignment made while solving, the relations adjacent to the
  /// assigned variable that were moved to the front of the queue.
  std::vector<std::vector<int>> requeues;
  /// Number of full no-progress rotations observed (0 on success).
  int stalled_rotations = 0;
  /// Ordered event log: 'q' = dequeued, 'd' = discharged.
  std::vector<std::pair<char, int>> events;

  int visit_count(int relation_id) const {
    int n = 0;
    for (int id : dequeued)
      if (id == relation_id) ++n;
    return n;
  }
};

/// Hindley-Milner-style inference extended with operator type relations:
/// one pass over each definition generates types and relation instances, a
/// work-queue solver over a bipartite variable/relation dependency graph
/// runs them to fixpoint, and the solved types are written onto every
/// sub-expression's checked_type.
///
/// Throws Diagnostic with code TypeMismatch / UnificationError /
/// RelationFailed / Underconstrained on failure.
ModuleEnv infer(const ModuleEnv& m, SolverTrace* trace = nullptr);

/// Standalone unification facility (the same engine infer() uses), exposed
/// for direct testing and for passes that need to merge types.
class TypeUnifier {
 public:
  TypeUnifier();
  ~TypeUnifier();
  TypeUnifier(const TypeUnifier&) = delete;
  TypeUnifier& operator=(const TypeUnifier&) = delete;

  TypeRef fresh_hole();
  Dim fresh_dim_var();

  /// Merges two types, updating the union-find. Shape unification is
  /// per-dimension: Const = Const must match, Var binds, Any absorbs.
  /// Throws Diagnostic(UnificationError) on conflict.
  TypeRef unify(const TypeRef& a, const TypeRef& b, const SourceSpan& span = {});

  /// Replaces solved holes and bound dim vars by their representatives.
  TypeRef resolve(const TypeRef& t) const;

  /// Hole ids still unresolved inside t.
  std::vector<int> unresolved_holes(const TypeRef& t) const;

 private:
  friend struct InferCtx;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace microrelay
