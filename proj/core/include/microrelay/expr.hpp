// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "microrelay/attrs.hpp"
#include "microrelay/literal.hpp"
#include "microrelay/type.hpp"

namespace microrelay {

struct Expr;
using ExprRef = std::shared_ptr<const Expr>;

struct Pattern;
using PatternRef = std::shared_ptr<const Pattern>;

enum class ExprKind : uint8_t {
  LocalVar,
  GlobalVar,
  Constant,
  OperatorRef,
  ConstructorRef,
  Call,
  Let,
  Function,
  Tuple,
  Projection,
  If,
  Match,
  RefNew,
  RefRead,
  RefWrite,
};

const char* expr_kind_name(ExprKind k);

/// Function parameter: a variable name with an optional type annotation.
struct Param {
  std::string name;
  TypeRef annotation;  // may be null
};

enum class PatternKind : uint8_t { Wildcard, Var, Constructor, Tuple };

struct Pattern {
  PatternKind kind;
  SourceSpan span;
  std::string name;                 // Var binder or Constructor name
  std::vector<PatternRef> subpats;  // Constructor fields / Tuple elements

  explicit Pattern(PatternKind k) : kind(k) {}
};

struct MatchClause {
  PatternRef pattern;
  ExprRef body;
};

/// An IR expression node. Immutable after construction (checked_type is the
/// one write-once annotation slot filled by type inference). Nodes are a
/// single struct with a kind tag; each kind uses the documented subset of
/// fields. Structural sharing of subtrees is allowed and common.
struct Expr {
  ExprKind kind;
  SourceSpan span;

  // Filled by type inference; read-only afterwards.
  mutable TypeRef checked_type;

  // LocalVar / GlobalVar / OperatorRef / ConstructorRef; Let binder name.
  std::string name;

  // Constant payload.
  TensorLiteral literal;

  // Generic children:
  //   Call: a = callee          Let: a = value, b = body
  //   If: a,b,c = cond/then/else   Projection/Match/RefNew/RefRead: a
  //   RefWrite: a = ref, b = value  Function: a = body
  ExprRef a, b, c;

  // Call arguments; Tuple fields.
  std::vector<ExprRef> elems;

  // Call: explicit type arguments.
  std::vector<TypeRef> type_args;

  // Call: operator attributes. Function: attribute flags (e.g. Primitive).
  AttrMap attrs;

  // Function.
  std::vector<Param> params;
  std::vector<std::string> type_params;
  TypeRef ret_type;  // may be null

  // Let annotation (may be null).
  TypeRef annotation;

  // Projection index.
  int64_t index = 0;

  // Match clauses.
  std::vector<MatchClause> clauses;

  explicit Expr(ExprKind k) : kind(k) {}
  bool is(ExprKind k) const { return kind == k; }
};

// ---- builders ----------------------------------------------------------

ExprRef mk_var(std::string name, SourceSpan span = {});
ExprRef mk_global(std::string name, SourceSpan span = {});
ExprRef mk_const(TensorLiteral lit, SourceSpan span = {});
ExprRef mk_const_i32(int64_t v);
ExprRef mk_const_f32(float v);
ExprRef mk_const_bool(bool v);
ExprRef mk_op(std::string name, SourceSpan span = {});
ExprRef mk_ctor(std::string name, SourceSpan span = {});
ExprRef mk_call(ExprRef callee, std::vector<ExprRef> args, AttrMap attrs = {},
                std::vector<TypeRef> type_args = {}, SourceSpan span = {});
/// Shorthand for calling a registry operator by name.
ExprRef mk_opcall(const std::string& op, std::vector<ExprRef> args, AttrMap attrs = {},
                  SourceSpan span = {});
ExprRef mk_let(std::string var, ExprRef value, ExprRef body, TypeRef annotation = nullptr,
               SourceSpan span = {});
ExprRef mk_fn(std::vector<Param> params, ExprRef body, TypeRef ret_type = nullptr,
              std::vector<std::string> type_params = {}, AttrMap attrs = {}, SourceSpan span = {});
ExprRef mk_tuple(std::vector<ExprRef> fields, SourceSpan span = {});
ExprRef mk_proj(ExprRef tuple, int64_t index, SourceSpan span = {});
ExprRef mk_if(ExprRef cond, ExprRef then_e, ExprRef else_e, SourceSpan span = {});
ExprRef mk_match(ExprRef scrutinee, std::vector<MatchClause> clauses, SourceSpan span = {});
ExprRef mk_ref_new(ExprRef init, SourceSpan span = {});
ExprRef mk_ref_read(ExprRef ref, SourceSpan span = {});
ExprRef mk_ref_write(ExprRef ref, ExprRef value, SourceSpan span = {});

PatternRef mk_pat_wildcard(SourceSpan span = {});
PatternRef mk_pat_var(std::string name, SourceSpan span = {});
PatternRef mk_pat_ctor(std::string name, std::vector<PatternRef> subpats, SourceSpan span = {});
PatternRef mk_pat_tuple(std::vector<PatternRef> subpats, SourceSpan span = {});

// ---- function attribute helpers ----------------------------------------

inline constexpr const char* kPrimitiveAttr = "Primitive";

bool fn_is_primitive(const ExprRef& fn);
ExprRef fn_with_primitive(const ExprRef& fn);

}  // namespace microrelay
