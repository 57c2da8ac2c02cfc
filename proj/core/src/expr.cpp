// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#include "microrelay/expr.hpp"

namespace microrelay {

const char* expr_kind_name(ExprKind k) {
  switch (k) {
    case ExprKind::LocalVar: return "LocalVar";
    case ExprKind::GlobalVar: return "GlobalVar";
    case ExprKind::Constant: return "Constant";
    case ExprKind::OperatorRef: return "OperatorRef";
    case ExprKind::ConstructorRef: return "ConstructorRef";
    case ExprKind::Call: return "Call";
    case ExprKind::Let: return "Let";
    case ExprKind::Function: return "Function";
    case ExprKind::Tuple: return "Tuple";
    case ExprKind::Projection: return "Projection";
    case ExprKind::If: return "If";
    case ExprKind::Match: return "Match";
    case ExprKind::RefNew: return "RefNew";
    case ExprKind::RefRead: return "RefRead";
    case ExprKind::RefWrite: return "RefWrite";
  }
  return "?";
}

namespace {
std::shared_ptr<Expr> node(ExprKind k, SourceSpan span) {
  auto e = std::make_shared<Expr>(k);
  e->span = std::move(span);
  return e;
}
}  // namespace

ExprRef mk_var(std::string name, SourceSpan span) {
  auto e = node(ExprKind::LocalVar, std::move(span));
  e->name = std::move(name);
  return e;
}

ExprRef mk_global(std::string name, SourceSpan span) {
  auto e = node(ExprKind::GlobalVar, std::move(span));
  e->name = std::move(name);
  return e;
}

ExprRef mk_const(TensorLiteral lit, SourceSpan span) {
  auto e = node(ExprKind::Constant, std::move(span));
  e->literal = std::move(lit);
  return e;
}

ExprRef mk_const_i32(int64_t v) { return mk_const(TensorLiteral::scalar_i32(v)); }
ExprRef mk_const_f32(float v) { return mk_const(TensorLiteral::scalar_f32(v)); }
ExprRef mk_const_bool(bool v) { return mk_const(TensorLiteral::scalar_bool(v)); }

ExprRef mk_op(std::string name, SourceSpan span) {
  auto e = node(ExprKind::OperatorRef, std::move(span));
  e->name = std::move(name);
  return e;
}

ExprRef mk_ctor(std::string name, SourceSpan span) {
  auto e = node(ExprKind::ConstructorRef, std::move(span));
  e->name = std::move(name);
  return e;
}

ExprRef mk_call(ExprRef callee, std::vector<ExprRef> args, AttrMap attrs,
                std::vector<TypeRef> type_args, SourceSpan span) {
  auto e = node(ExprKind::Call, std::move(span));
  e->a = std::move(callee);
  e->elems = std::move(args);
  e->attrs = std::move(attrs);
  e->type_args = std::move(type_args);
  return e;
}

ExprRef mk_opcall(const std::string& op, std::vector<ExprRef> args, AttrMap attrs,
                  SourceSpan span) {
  return mk_call(mk_op(op, span), std::move(args), std::move(attrs), {}, span);
}

ExprRef mk_let(std::string var, ExprRef value, ExprRef body, TypeRef annotation, SourceSpan span) {
  auto e = node(ExprKind::Let, std::move(span));
  e->name = std::move(var);
  e->a = std::move(value);
  e->b = std::move(body);
  e->annotation = std::move(annotation);
  return e;
}

ExprRef mk_fn(std::vector<Param> params, ExprRef body, TypeRef ret_type,
              std::vector<std::string> type_params, AttrMap attrs, SourceSpan span) {
  auto e = node(ExprKind::Function, std::move(span));
  e->params = std::move(params);
  e->a = std::move(body);
  e->ret_type = std::move(ret_type);
  e->type_params = std::move(type_params);
  e->attrs = std::move(attrs);
  return e;
}

ExprRef mk_tuple(std::vector<ExprRef> fields, SourceSpan span) {
  auto e = node(ExprKind::Tuple, std::move(span));
  e->elems = std::move(fields);
  return e;
}

ExprRef mk_proj(ExprRef tuple, int64_t index, SourceSpan span) {
  auto e = node(ExprKind::Projection, std::move(span));
  e->a = std::move(tuple);
  e->index = index;
  return e;
}

ExprRef mk_if(ExprRef cond, ExprRef then_e, ExprRef else_e, SourceSpan span) {
  auto e = node(ExprKind::If, std::move(span));
  e->a = std::move(cond);
  e->b = std::move(then_e);
  e->c = std::move(else_e);
  return e;
}

ExprRef mk_match(ExprRef scrutinee, std::vector<MatchClause> clauses, SourceSpan span) {
  auto e = node(ExprKind::Match, std::move(span));
  e->a = std::move(scrutinee);
  e->clauses = std::move(clauses);
  return e;
}

ExprRef mk_ref_new(ExprRef init, SourceSpan span) {
  auto e = node(ExprKind::RefNew, std::move(span));
  e->a = std::move(init);
  return e;
}

ExprRef mk_ref_read(ExprRef ref, SourceSpan span) {
  auto e = node(ExprKind::RefRead, std::move(span));
  e->a = std::move(ref);
  return e;
}

ExprRef mk_ref_write(ExprRef ref, ExprRef value, SourceSpan span) {
  auto e = node(ExprKind::RefWrite, std::move(span));
  e->a = std::move(ref);
  e->b = std::move(value);
  return e;
}

namespace {
std::shared_ptr<Pattern> pat(PatternKind k, SourceSpan span) {
  auto p = std::make_shared<Pattern>(k);
  p->span = std::move(span);
  return p;
}
}  // namespace

PatternRef mk_pat_wildcard(SourceSpan span) { return pat(PatternKind::Wildcard, std::move(span)); }

PatternRef mk_pat_var(std::string name, SourceSpan span) {
  auto p = pat(PatternKind::Var, std::move(span));
  p->name = std::move(name);
  return p;
}

PatternRef mk_pat_ctor(std::string name, std::vector<PatternRef> subpats, SourceSpan span) {
  auto p = pat(PatternKind::Constructor, std::move(span));
  p->name = std::move(name);
  p->subpats = std::move(subpats);
  return p;
}

PatternRef mk_pat_tuple(std::vector<PatternRef> subpats, SourceSpan span) {
  auto p = pat(PatternKind::Tuple, std::move(span));
  p->subpats = std::move(subpats);
  return p;
}

bool fn_is_primitive(const ExprRef& fn) {
  if (!fn || fn->kind != ExprKind::Function) return false;
  return attr_bool_or(fn->attrs, kPrimitiveAttr, false);
}

ExprRef fn_with_primitive(const ExprRef& fn) {
  MREL_CHECK(fn && fn->kind == ExprKind::Function, "fn_with_primitive on non-function");
  auto copy = std::make_shared<Expr>(*fn);
  copy->attrs[kPrimitiveAttr] = true;
  return copy;
}

}  // namespace microrelay
