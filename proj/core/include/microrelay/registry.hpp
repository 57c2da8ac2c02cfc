// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "microrelay/attrs.hpp"
#include "microrelay/type.hpp"
#include "microrelay/value.hpp"

namespace microrelay {

/// Fusion behavior class of an operator. The total order
/// Elementwise < Broadcast < Injective < Reduction < ComplexOutFusable < Opaque
/// is what the grouping rules compare against.
enum class FusionPattern : uint8_t {
  Elementwise = 0,
  Broadcast = 1,
  Injective = 2,
  Reduction = 3,
  ComplexOutFusable = 4,
  Opaque = 5,
};

const char* fusion_pattern_name(FusionPattern p);

/// Outcome of applying a type relation to a slot vector.
struct RelationResult {
  enum class Kind : uint8_t { Holds, Fails, Progress } kind;
  /// Progress payload: slot index -> type the slot must unify with.
  /// Empty assignments mean "no progress possible yet".
  std::vector<std::pair<size_t, TypeRef>> assignments;
  std::string fail_reason;

  static RelationResult holds() { return {Kind::Holds, {}, {}}; }
  static RelationResult fails(std::string reason) { return {Kind::Fails, {}, std::move(reason)}; }
  static RelationResult progress(std::vector<std::pair<size_t, TypeRef>> a) {
    return {Kind::Progress, std::move(a), {}};
  }
  static RelationResult stuck() { return {Kind::Progress, {}, {}}; }

  bool is_holds() const { return kind == Kind::Holds; }
  bool is_fails() const { return kind == Kind::Fails; }
  bool is_progress() const { return kind == Kind::Progress; }
};

/// A type relation: an executable symbolic constraint over a list of types
/// (operator arguments followed by the result). Relations are pure.
using RelationFn = std::function<RelationResult(
    const std::vector<TypeRef>& slots, const AttrMap& attrs, const SourceSpan& span)>;

/// Reference numeric semantics of an operator.
using KernelFn = std::function<ValueRef(
    const std::vector<ValueRef>& args, const AttrMap& attrs, const SourceSpan& span)>;

struct OperatorDecl {
  std::string name;
  size_t arity = 0;
  std::map<std::string, AttrKind> attrs_schema;
  std::string relation;  // relation id
  FusionPattern pattern = FusionPattern::Opaque;
  KernelFn eval;
};

/// The operator set. Built once, then read-only; concurrent lookups are
/// safe. Extensible: copy the builtin registry and register more.
class OpRegistry {
 public:
  OpRegistry() = default;

  /// Throws Diagnostic(DuplicateOperator) if the name is taken.
  void register_op(OperatorDecl decl);

  const OperatorDecl* find(const std::string& name) const;
  /// Like find(), but throws Diagnostic(UnknownOperator).
  const OperatorDecl& get(const std::string& name, const SourceSpan& span = {}) const;
  bool contains(const std::string& name) const { return ops_.count(name) > 0; }

  std::vector<std::string> op_names() const;

 private:
  std::map<std::string, OperatorDecl> ops_;
};

/// The shared builtin operator set.
std::shared_ptr<const OpRegistry> builtin_registry();

/// Runs the named relation on a slot vector. Slots may contain holes or
/// symbolic dims; the relation reports Holds/Fails only once it can decide,
/// and Progress with slot assignments when partial information suffices
/// (e.g. output shape computable from concrete inputs).
RelationResult apply_relation(const std::string& relation, const std::vector<TypeRef>& slots,
                              const AttrMap& attrs = {}, const SourceSpan& span = {});

bool relation_exists(const std::string& relation);

}  // namespace microrelay
