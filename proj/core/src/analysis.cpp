// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#include "microrelay/analysis.hpp"

#include <algorithm>
#include <cstring>
#include <functional>
#include <map>
#include <set>

#include "microrelay/registry.hpp"

namespace microrelay {

// ---- variable walks ------------------------------------------------------

namespace {

void pattern_binders(const PatternRef& p, std::vector<std::string>* out) {
  if (!p) return;
  if (p->kind == PatternKind::Var) out->push_back(p->name);
  for (const auto& s : p->subpats) pattern_binders(s, out);
}

void free_vars_walk(const ExprRef& e, std::vector<std::string>& bound,
                    std::vector<std::string>& out) {
  if (!e) return;
  switch (e->kind) {
    case ExprKind::LocalVar: {
      if (std::find(bound.rbegin(), bound.rend(), e->name) == bound.rend() &&
          std::find(out.begin(), out.end(), e->name) == out.end()) {
        out.push_back(e->name);
      }
      return;
    }
    case ExprKind::GlobalVar:
    case ExprKind::Constant:
    case ExprKind::OperatorRef:
    case ExprKind::ConstructorRef:
      return;
    case ExprKind::Call: {
      free_vars_walk(e->a, bound, out);
      for (const auto& arg : e->elems) free_vars_walk(arg, bound, out);
      return;
    }
    case ExprKind::Let: {
      free_vars_walk(e->a, bound, out);
      bound.push_back(e->name);
      free_vars_walk(e->b, bound, out);
      bound.pop_back();
      return;
    }
    case ExprKind::Function: {
      size_t mark = bound.size();
      for (const auto& p : e->params) bound.push_back(p.name);
      free_vars_walk(e->a, bound, out);
      bound.resize(mark);
      return;
    }
    case ExprKind::Tuple: {
      for (const auto& f : e->elems) free_vars_walk(f, bound, out);
      return;
    }
    case ExprKind::Projection:
      free_vars_walk(e->a, bound, out);
      return;
    case ExprKind::If: {
      free_vars_walk(e->a, bound, out);
      free_vars_walk(e->b, bound, out);
      free_vars_walk(e->c, bound, out);
      return;
    }
    case ExprKind::Match: {
      free_vars_walk(e->a, bound, out);
      for (const auto& clause : e->clauses) {
        size_t mark = bound.size();
        std::vector<std::string> binders;
        pattern_binders(clause.pattern, &binders);
        for (auto& b : binders) bound.push_back(b);
        free_vars_walk(clause.body, bound, out);
        bound.resize(mark);
      }
      return;
    }
    case ExprKind::RefNew:
    case ExprKind::RefRead:
      free_vars_walk(e->a, bound, out);
      return;
    case ExprKind::RefWrite:
      free_vars_walk(e->a, bound, out);
      free_vars_walk(e->b, bound, out);
      return;
  }
}

}  // namespace

std::vector<std::string> free_vars(const ExprRef& e) {
  std::vector<std::string> bound, out;
  free_vars_walk(e, bound, out);
  return out;
}

namespace {

void all_names_walk(const ExprRef& e, std::set<std::string>& out) {
  if (!e) return;
  if (e->kind == ExprKind::LocalVar || e->kind == ExprKind::Let) out.insert(e->name);
  if (e->kind == ExprKind::Function)
    for (const auto& p : e->params) out.insert(p.name);
  if (e->kind == ExprKind::Match) {
    for (const auto& clause : e->clauses) {
      std::vector<std::string> binders;
      pattern_binders(clause.pattern, &binders);
      out.insert(binders.begin(), binders.end());
    }
  }
  all_names_walk(e->a, out);
  all_names_walk(e->b, out);
  all_names_walk(e->c, out);
  for (const auto& x : e->elems) all_names_walk(x, out);
  if (e->kind == ExprKind::Match)
    for (const auto& clause : e->clauses) all_names_walk(clause.body, out);
}

}  // namespace

std::vector<std::string> all_var_names(const ExprRef& e) {
  std::set<std::string> s;
  all_names_walk(e, s);
  return {s.begin(), s.end()};
}

NameSupply::NameSupply(const std::vector<ExprRef>& seeds, std::string prefix)
    : prefix_(std::move(prefix)) {
  std::set<std::string> s;
  for (const auto& e : seeds) all_names_walk(e, s);
  used_.assign(s.begin(), s.end());
}

bool NameSupply::taken(const std::string& name) const {
  return std::find(used_.begin(), used_.end(), name) != used_.end();
}

std::string NameSupply::fresh() {
  for (;;) {
    std::string cand = prefix_ + std::to_string(counter_++);
    if (!taken(cand)) {
      used_.push_back(cand);
      return cand;
    }
  }
}

// ---- alpha equality and hashing -----------------------------------------

namespace {

struct AlphaCtx {
  // bound name -> binder serial number, one map per side
  std::vector<std::pair<std::string, int>> left, right;
  int next_id = 0;

  int lookup(const std::vector<std::pair<std::string, int>>& side, const std::string& n) const {
    for (auto it = side.rbegin(); it != side.rend(); ++it)
      if (it->first == n) return it->second;
    return -1;
  }
  void push(const std::string& l, const std::string& r) {
    left.emplace_back(l, next_id);
    right.emplace_back(r, next_id);
    ++next_id;
  }
  void pop(size_t n) {
    left.resize(left.size() - n);
    right.resize(right.size() - n);
  }
};

bool alpha_eq(const ExprRef& a, const ExprRef& b, AlphaCtx& ctx);

bool alpha_eq_pattern(const PatternRef& a, const PatternRef& b, AlphaCtx& ctx, size_t* pushed) {
  if (!a || !b) return a == b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case PatternKind::Wildcard:
      return true;
    case PatternKind::Var:
      ctx.push(a->name, b->name);
      ++*pushed;
      return true;
    case PatternKind::Constructor:
      if (a->name != b->name) return false;
      [[fallthrough]];
    case PatternKind::Tuple: {
      if (a->subpats.size() != b->subpats.size()) return false;
      for (size_t i = 0; i < a->subpats.size(); ++i)
        if (!alpha_eq_pattern(a->subpats[i], b->subpats[i], ctx, pushed)) return false;
      return true;
    }
  }
  return false;
}

bool type_annotation_equal(const TypeRef& a, const TypeRef& b) {
  if (!a && !b) return true;
  if (!a || !b) return false;
  return type_equal(a, b);
}

bool alpha_eq(const ExprRef& a, const ExprRef& b, AlphaCtx& ctx) {
  if (a == b && ctx.left.empty() && ctx.right.empty()) return true;
  if (!a || !b) return a == b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case ExprKind::LocalVar: {
      int ia = ctx.lookup(ctx.left, a->name);
      int ib = ctx.lookup(ctx.right, b->name);
      if (ia != ib) return false;
      return ia >= 0 || a->name == b->name;  // both free: names must agree
    }
    case ExprKind::GlobalVar:
    case ExprKind::OperatorRef:
    case ExprKind::ConstructorRef:
      return a->name == b->name;
    case ExprKind::Constant:
      return a->literal.same_as(b->literal);
    case ExprKind::Call: {
      if (a->elems.size() != b->elems.size()) return false;
      if (!attr_map_equal(a->attrs, b->attrs)) return false;
      if (a->type_args.size() != b->type_args.size()) return false;
      for (size_t i = 0; i < a->type_args.size(); ++i)
        if (!type_equal(a->type_args[i], b->type_args[i])) return false;
      if (!alpha_eq(a->a, b->a, ctx)) return false;
      for (size_t i = 0; i < a->elems.size(); ++i)
        if (!alpha_eq(a->elems[i], b->elems[i], ctx)) return false;
      return true;
    }
    case ExprKind::Let: {
      if (!type_annotation_equal(a->annotation, b->annotation)) return false;
      if (!alpha_eq(a->a, b->a, ctx)) return false;
      ctx.push(a->name, b->name);
      bool ok = alpha_eq(a->b, b->b, ctx);
      ctx.pop(1);
      return ok;
    }
    case ExprKind::Function: {
      if (a->params.size() != b->params.size()) return false;
      if (a->type_params != b->type_params) return false;
      if (!attr_map_equal(a->attrs, b->attrs)) return false;
      if (!type_annotation_equal(a->ret_type, b->ret_type)) return false;
      for (size_t i = 0; i < a->params.size(); ++i)
        if (!type_annotation_equal(a->params[i].annotation, b->params[i].annotation)) return false;
      for (size_t i = 0; i < a->params.size(); ++i) ctx.push(a->params[i].name, b->params[i].name);
      bool ok = alpha_eq(a->a, b->a, ctx);
      ctx.pop(a->params.size());
      return ok;
    }
    case ExprKind::Tuple: {
      if (a->elems.size() != b->elems.size()) return false;
      for (size_t i = 0; i < a->elems.size(); ++i)
        if (!alpha_eq(a->elems[i], b->elems[i], ctx)) return false;
      return true;
    }
    case ExprKind::Projection:
      return a->index == b->index && alpha_eq(a->a, b->a, ctx);
    case ExprKind::If:
      return alpha_eq(a->a, b->a, ctx) && alpha_eq(a->b, b->b, ctx) && alpha_eq(a->c, b->c, ctx);
    case ExprKind::Match: {
      if (a->clauses.size() != b->clauses.size()) return false;
      if (!alpha_eq(a->a, b->a, ctx)) return false;
      for (size_t i = 0; i < a->clauses.size(); ++i) {
        size_t pushed = 0;
        if (!alpha_eq_pattern(a->clauses[i].pattern, b->clauses[i].pattern, ctx, &pushed))
          return false;
        bool ok = alpha_eq(a->clauses[i].body, b->clauses[i].body, ctx);
        ctx.pop(pushed);
        if (!ok) return false;
      }
      return true;
    }
    case ExprKind::RefNew:
    case ExprKind::RefRead:
      return alpha_eq(a->a, b->a, ctx);
    case ExprKind::RefWrite:
      return alpha_eq(a->a, b->a, ctx) && alpha_eq(a->b, b->b, ctx);
  }
  return false;
}

}  // namespace

bool alpha_equal(const ExprRef& a, const ExprRef& b) {
  AlphaCtx ctx;
  return alpha_eq(a, b, ctx);
}

namespace {

inline uint64_t hash_combine(uint64_t h, uint64_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 12) + (h >> 4));
}

uint64_t hash_string(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (char c : s) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
  return h;
}

uint64_t hash_type(const TypeRef& t) {
  if (!t) return 7;
  uint64_t h = hash_combine(11, static_cast<uint64_t>(t->kind));
  h = hash_combine(h, hash_string(t->name));
  if (t->kind == TypeKind::Tensor) {
    h = hash_combine(h, static_cast<uint64_t>(t->dtype.code));
    h = hash_combine(h, static_cast<uint64_t>(t->dtype.bits));
    for (const auto& d : t->shape.dims) {
      h = hash_combine(h, static_cast<uint64_t>(d.kind));
      h = hash_combine(h, d.is_const() ? static_cast<uint64_t>(d.value) : hash_string(d.name));
    }
  }
  for (const auto& f : t->fields) h = hash_combine(h, hash_type(f));
  for (const auto& a : t->arg_types) h = hash_combine(h, hash_type(a));
  if (t->ret_type) h = hash_combine(h, hash_type(t->ret_type));
  return h;
}

struct HashCtx {
  std::vector<std::pair<std::string, int>> bound;
  int next_id = 0;
};

uint64_t hash_literal(const TensorLiteral& lit) {
  uint64_t h = hash_string(lit.dtype.str());
  for (const auto& d : lit.shape.dims) h = hash_combine(h, static_cast<uint64_t>(d.value));
  int64_t n = lit.num_elements();
  for (int64_t i = 0; i < n; ++i) {
    double v = lit.get_double(i);
    uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    h = hash_combine(h, bits);
  }
  return h;
}

uint64_t hash_walk(const ExprRef& e, HashCtx& ctx) {
  if (!e) return 3;
  uint64_t h = hash_combine(17, static_cast<uint64_t>(e->kind));
  switch (e->kind) {
    case ExprKind::LocalVar: {
      for (auto it = ctx.bound.rbegin(); it != ctx.bound.rend(); ++it) {
        if (it->first == e->name) return hash_combine(h, static_cast<uint64_t>(it->second));
      }
      return hash_combine(h, hash_string(e->name));
    }
    case ExprKind::GlobalVar:
    case ExprKind::OperatorRef:
    case ExprKind::ConstructorRef:
      return hash_combine(h, hash_string(e->name));
    case ExprKind::Constant:
      return hash_combine(h, hash_literal(e->literal));
    default:
      break;
  }
  for (const auto& [k, v] : e->attrs) {
    h = hash_combine(h, hash_string(k));
    h = hash_combine(h, hash_string(attr_value_str(v)));
  }
  if (e->kind == ExprKind::Let) {
    h = hash_combine(h, hash_walk(e->a, ctx));
    ctx.bound.emplace_back(e->name, ctx.next_id++);
    h = hash_combine(h, hash_walk(e->b, ctx));
    ctx.bound.pop_back();
    return h;
  }
  if (e->kind == ExprKind::Function) {
    for (const auto& p : e->params) {
      h = hash_combine(h, hash_type(p.annotation));
      ctx.bound.emplace_back(p.name, ctx.next_id++);
    }
    h = hash_combine(h, hash_walk(e->a, ctx));
    ctx.bound.resize(ctx.bound.size() - e->params.size());
    return h;
  }
  if (e->kind == ExprKind::Match) {
    h = hash_combine(h, hash_walk(e->a, ctx));
    for (const auto& clause : e->clauses) {
      std::vector<std::string> binders;
      pattern_binders(clause.pattern, &binders);
      std::function<uint64_t(const PatternRef&)> hp = [&](const PatternRef& p) -> uint64_t {
        uint64_t ph = hash_combine(23, static_cast<uint64_t>(p->kind));
        if (p->kind == PatternKind::Constructor) ph = hash_combine(ph, hash_string(p->name));
        for (const auto& s : p->subpats) ph = hash_combine(ph, hp(s));
        return ph;
      };
      h = hash_combine(h, hp(clause.pattern));
      for (auto& b : binders) ctx.bound.emplace_back(b, ctx.next_id++);
      h = hash_combine(h, hash_walk(clause.body, ctx));
      ctx.bound.resize(ctx.bound.size() - binders.size());
    }
    return h;
  }
  h = hash_combine(h, hash_walk(e->a, ctx));
  h = hash_combine(h, hash_walk(e->b, ctx));
  h = hash_combine(h, hash_walk(e->c, ctx));
  h = hash_combine(h, static_cast<uint64_t>(e->index));
  for (const auto& x : e->elems) h = hash_combine(h, hash_walk(x, ctx));
  for (const auto& t : e->type_args) h = hash_combine(h, hash_type(t));
  return h;
}

}  // namespace

uint64_t structural_hash(const ExprRef& e) {
  HashCtx ctx;
  return hash_walk(e, ctx);
}

// ---- well-formedness -----------------------------------------------------

namespace {

struct WfCtx {
  const ModuleEnv* m;
  std::vector<std::string> bound;

  bool is_bound(const std::string& n) const {
    return std::find(bound.begin(), bound.end(), n) != bound.end();
  }
};

void wf_type(const WfCtx& ctx, const TypeRef& t, const SourceSpan& span) {
  if (!t) return;
  if (t->kind == TypeKind::TypeCall || t->kind == TypeKind::TypeName) {
    if (!t->name.empty() && !ctx.m->find_adt(t->name)) {
      // Type variables parse as TypeVar, so a TypeName here must be an ADT.
      diag_throw(DiagCode::UnknownConstructor, "unknown type name " + t->name, span);
    }
    if (t->kind == TypeKind::TypeCall) {
      const auto* def = ctx.m->find_adt(t->name);
      if (def && def->type_params.size() != t->fields.size())
        diag_throw(DiagCode::TypeMismatch,
                   t->name + " expects " + std::to_string(def->type_params.size()) +
                       " type arguments, got " + std::to_string(t->fields.size()),
                   span);
    }
  }
  for (const auto& f : t->fields) wf_type(ctx, f, span);
  for (const auto& a : t->arg_types) wf_type(ctx, a, span);
  if (t->ret_type) wf_type(ctx, t->ret_type, span);
  if (t->kind == TypeKind::Tensor) validate_base_type(t->dtype, span);
}

void wf_walk(WfCtx& ctx, const ExprRef& e) {
  if (!e) return;
  switch (e->kind) {
    case ExprKind::LocalVar:
      if (!ctx.is_bound(e->name))
        diag_throw(DiagCode::UnboundVariable, "%" + e->name + " is not bound", e->span);
      return;
    case ExprKind::GlobalVar:
      if (!ctx.m->has_global(e->name))
        diag_throw(DiagCode::UnknownGlobal, "@" + e->name + " is not defined", e->span);
      return;
    case ExprKind::OperatorRef:
      if (!ctx.m->registry->contains(e->name))
        diag_throw(DiagCode::UnknownOperator, e->name + " is not a registered operator", e->span);
      return;
    case ExprKind::ConstructorRef:
      if (!ctx.m->find_constructor(e->name))
        diag_throw(DiagCode::UnknownConstructor, e->name + " is not a declared constructor",
                   e->span);
      return;
    case ExprKind::Constant:
      e->literal.validate(e->span);
      return;
    case ExprKind::Call: {
      wf_walk(ctx, e->a);
      for (const auto& arg : e->elems) wf_walk(ctx, arg);
      if (e->a->kind == ExprKind::OperatorRef) {
        const auto& decl = ctx.m->registry->get(e->a->name, e->a->span);
        if (decl.arity != e->elems.size())
          diag_throw(DiagCode::ArityMismatch,
                     decl.name + " expects " + std::to_string(decl.arity) + " arguments, got " +
                         std::to_string(e->elems.size()),
                     e->span);
        for (const auto& [key, val] : e->attrs) {
          auto it = decl.attrs_schema.find(key);
          if (it == decl.attrs_schema.end())
            diag_throw(DiagCode::UnknownOperator,
                       decl.name + " has no attribute '" + key + "'", e->span);
        }
      }
      for (const auto& t : e->type_args) wf_type(ctx, t, e->span);
      return;
    }
    case ExprKind::Let: {
      wf_type(ctx, e->annotation, e->span);
      wf_walk(ctx, e->a);
      ctx.bound.push_back(e->name);
      wf_walk(ctx, e->b);
      ctx.bound.pop_back();
      return;
    }
    case ExprKind::Function: {
      size_t mark = ctx.bound.size();
      for (const auto& p : e->params) {
        wf_type(ctx, p.annotation, e->span);
        ctx.bound.push_back(p.name);
      }
      wf_type(ctx, e->ret_type, e->span);
      wf_walk(ctx, e->a);
      ctx.bound.resize(mark);
      return;
    }
    case ExprKind::Tuple:
      for (const auto& f : e->elems) wf_walk(ctx, f);
      return;
    case ExprKind::Projection:
      if (e->index < 0)
        diag_throw(DiagCode::TypeMismatch, "negative projection index", e->span);
      wf_walk(ctx, e->a);
      return;
    case ExprKind::If:
      wf_walk(ctx, e->a);
      wf_walk(ctx, e->b);
      wf_walk(ctx, e->c);
      return;
    case ExprKind::Match: {
      wf_walk(ctx, e->a);
      if (e->clauses.empty())
        diag_throw(DiagCode::MatchFailure, "match with no clauses", e->span);
      for (const auto& clause : e->clauses) {
        std::function<void(const PatternRef&)> check_pat = [&](const PatternRef& p) {
          if (p->kind == PatternKind::Constructor) {
            const AdtConstructor* c = ctx.m->find_constructor(p->name);
            if (!c)
              diag_throw(DiagCode::UnknownConstructor, p->name + " is not a declared constructor",
                         p->span);
            if (c->field_types.size() != p->subpats.size())
              diag_throw(DiagCode::TypeMismatch,
                         p->name + " has " + std::to_string(c->field_types.size()) +
                             " fields, pattern has " + std::to_string(p->subpats.size()),
                         p->span);
          }
          for (const auto& s : p->subpats) check_pat(s);
        };
        check_pat(clause.pattern);
        size_t mark = ctx.bound.size();
        std::vector<std::string> binders;
        pattern_binders(clause.pattern, &binders);
        for (auto& b : binders) ctx.bound.push_back(b);
        wf_walk(ctx, clause.body);
        ctx.bound.resize(mark);
      }
      return;
    }
    case ExprKind::RefNew:
    case ExprKind::RefRead:
      wf_walk(ctx, e->a);
      return;
    case ExprKind::RefWrite:
      wf_walk(ctx, e->a);
      wf_walk(ctx, e->b);
      return;
  }
}

}  // namespace

void check_well_formed(const ModuleEnv& m, const ExprRef& e, const std::vector<std::string>& bound) {
  WfCtx ctx{&m, bound};
  wf_walk(ctx, e);
}

void check_well_formed(const ModuleEnv& m) {
  for (const auto& [name, def] : m.adts) {
    for (const auto& ctor : def.constructors) {
      const AdtDef* owner = nullptr;
      m.find_constructor(ctor.name, &owner);
      if (owner && owner->name != def.name)
        diag_throw(DiagCode::NameCollision,
                   "constructor " + ctor.name + " declared by both " + owner->name + " and " +
                       def.name);
    }
  }
  for (const auto& [name, fn] : m.globals) {
    MREL_CHECK(fn && fn->kind == ExprKind::Function, "global @" + name + " is not a function");
    check_well_formed(m, fn);
  }
}

// ---- A-normal form -------------------------------------------------------

namespace {

struct Uniquifier {
  NameSupply names;
  explicit Uniquifier(const ExprRef& root) : names({root}, "t") {}

  std::vector<std::pair<std::string, std::string>> renames;
  std::set<std::string> seen;

  std::string bind(const std::string& name) {
    std::string fresh = name;
    if (seen.count(name)) {
      int i = 1;
      while (seen.count(name + "_" + std::to_string(i))) ++i;
      fresh = name + "_" + std::to_string(i);
    }
    seen.insert(fresh);
    names.reserve(fresh);
    renames.emplace_back(name, fresh);
    return fresh;
  }

  std::string lookup(const std::string& name) const {
    for (auto it = renames.rbegin(); it != renames.rend(); ++it)
      if (it->first == name) return it->second;
    return name;
  }

  PatternRef run_pattern(const PatternRef& p) {
    if (!p) return p;
    auto q = std::make_shared<Pattern>(*p);
    if (p->kind == PatternKind::Var) q->name = bind(p->name);
    q->subpats.clear();
    for (const auto& s : p->subpats) q->subpats.push_back(run_pattern(s));
    return q;
  }

  ExprRef run(const ExprRef& e) {
    if (!e) return e;
    switch (e->kind) {
      case ExprKind::LocalVar:
        return mk_var(lookup(e->name), e->span);
      case ExprKind::GlobalVar:
      case ExprKind::Constant:
      case ExprKind::OperatorRef:
      case ExprKind::ConstructorRef:
        return e;
      case ExprKind::Let: {
        auto value = run(e->a);
        size_t mark = renames.size();
        std::string fresh = bind(e->name);
        auto body = run(e->b);
        renames.resize(mark);
        return mk_let(fresh, value, body, e->annotation, e->span);
      }
      case ExprKind::Function: {
        size_t mark = renames.size();
        std::vector<Param> params;
        for (const auto& p : e->params) params.push_back({bind(p.name), p.annotation});
        auto body = run(e->a);
        renames.resize(mark);
        return mk_fn(std::move(params), body, e->ret_type, e->type_params, e->attrs, e->span);
      }
      case ExprKind::Match: {
        auto scrut = run(e->a);
        std::vector<MatchClause> clauses;
        for (const auto& clause : e->clauses) {
          size_t mark = renames.size();
          auto pat = run_pattern(clause.pattern);
          auto body = run(clause.body);
          renames.resize(mark);
          clauses.push_back({pat, body});
        }
        return mk_match(scrut, std::move(clauses), e->span);
      }
      default: {
        auto copy = std::make_shared<Expr>(*e);
        copy->checked_type = nullptr;
        copy->a = run(e->a);
        copy->b = run(e->b);
        copy->c = run(e->c);
        copy->elems.clear();
        for (const auto& x : e->elems) copy->elems.push_back(run(x));
        return copy;
      }
    }
  }
};

struct AnfBuilder {
  NameSupply* names;

  struct Binding {
    std::string var;
    TypeRef annotation;
    ExprRef value;
    SourceSpan span;
  };
  std::vector<Binding> binds;

  ExprRef wrap(ExprRef body) const {
    for (auto it = binds.rbegin(); it != binds.rend(); ++it)
      body = mk_let(it->var, it->value, body, it->annotation, it->span);
    return body;
  }
};

bool is_atom(const ExprRef& e) {
  switch (e->kind) {
    case ExprKind::LocalVar:
    case ExprKind::GlobalVar:
    case ExprKind::Constant:
    case ExprKind::OperatorRef:
    case ExprKind::ConstructorRef:
    case ExprKind::Function:
      return true;
    case ExprKind::Projection:
      return is_atom(e->a);
    default:
      return false;
  }
}

ExprRef anf_value(const ExprRef& e, AnfBuilder& ll);
ExprRef anf_block(const ExprRef& e, NameSupply* names);

ExprRef anf_atom(const ExprRef& e, AnfBuilder& ll) {
  ExprRef v = anf_value(e, ll);
  if (is_atom(v)) return v;
  std::string var = ll.names->fresh();
  ll.binds.push_back({var, nullptr, v, e->span});
  return mk_var(var, e->span);
}

ExprRef anf_value(const ExprRef& e, AnfBuilder& ll) {
  switch (e->kind) {
    case ExprKind::LocalVar:
    case ExprKind::GlobalVar:
    case ExprKind::Constant:
    case ExprKind::OperatorRef:
    case ExprKind::ConstructorRef:
      return e;
    case ExprKind::Function: {
      auto body = anf_block(e->a, ll.names);
      return mk_fn(e->params, body, e->ret_type, e->type_params, e->attrs, e->span);
    }
    case ExprKind::Call: {
      auto callee = anf_atom(e->a, ll);
      std::vector<ExprRef> args;
      for (const auto& arg : e->elems) args.push_back(anf_atom(arg, ll));
      return mk_call(callee, std::move(args), e->attrs, e->type_args, e->span);
    }
    case ExprKind::Tuple: {
      std::vector<ExprRef> fields;
      for (const auto& f : e->elems) fields.push_back(anf_atom(f, ll));
      return mk_tuple(std::move(fields), e->span);
    }
    case ExprKind::Projection: {
      auto t = anf_atom(e->a, ll);
      return mk_proj(t, e->index, e->span);
    }
    case ExprKind::If: {
      auto cond = anf_atom(e->a, ll);
      return mk_if(cond, anf_block(e->b, ll.names), anf_block(e->c, ll.names), e->span);
    }
    case ExprKind::Match: {
      auto scrut = anf_atom(e->a, ll);
      std::vector<MatchClause> clauses;
      for (const auto& clause : e->clauses)
        clauses.push_back({clause.pattern, anf_block(clause.body, ll.names)});
      return mk_match(scrut, std::move(clauses), e->span);
    }
    case ExprKind::Let: {
      // Flatten: binders were made unique beforehand, so no capture risk.
      auto value = anf_value(e->a, ll);
      ll.binds.push_back({e->name, e->annotation, value, e->span});
      return anf_value(e->b, ll);
    }
    case ExprKind::RefNew:
      return mk_ref_new(anf_atom(e->a, ll), e->span);
    case ExprKind::RefRead:
      return mk_ref_read(anf_atom(e->a, ll), e->span);
    case ExprKind::RefWrite: {
      auto r = anf_atom(e->a, ll);
      auto v = anf_atom(e->b, ll);
      return mk_ref_write(r, v, e->span);
    }
  }
  return e;
}

ExprRef anf_block(const ExprRef& e, NameSupply* names) {
  AnfBuilder ll{names};
  ExprRef tail = anf_atom(e, ll);
  return ll.wrap(tail);
}

}  // namespace

ExprRef to_anf(const ExprRef& e) {
  Uniquifier uniq(e);
  ExprRef renamed = uniq.run(e);
  NameSupply names({renamed}, "t");
  if (renamed->kind == ExprKind::Function) {
    // Keep the top-level function node; normalize its body.
    return mk_fn(renamed->params, anf_block(renamed->a, &names), renamed->ret_type,
                 renamed->type_params, renamed->attrs, renamed->span);
  }
  return anf_block(renamed, &names);
}

ModuleEnv to_anf(const ModuleEnv& m) {
  ModuleEnv out = m;
  for (auto& [name, fn] : out.globals) fn = to_anf(fn);
  return out;
}

namespace {

bool anf_value_ok(const ExprRef& e);

bool anf_body_ok(const ExprRef& e) {
  ExprRef cur = e;
  while (cur->kind == ExprKind::Let) {
    if (!anf_value_ok(cur->a)) return false;
    cur = cur->b;
  }
  return is_atom(cur) && anf_value_ok(cur);
}

bool anf_value_ok(const ExprRef& e) {
  switch (e->kind) {
    case ExprKind::LocalVar:
    case ExprKind::GlobalVar:
    case ExprKind::Constant:
    case ExprKind::OperatorRef:
    case ExprKind::ConstructorRef:
      return true;
    case ExprKind::Function:
      return anf_body_ok(e->a);
    case ExprKind::Projection:
      return is_atom(e->a) && anf_value_ok(e->a);
    case ExprKind::Call: {
      if (!is_atom(e->a) || !anf_value_ok(e->a)) return false;
      for (const auto& arg : e->elems)
        if (!is_atom(arg) || !anf_value_ok(arg)) return false;
      return true;
    }
    case ExprKind::Tuple: {
      for (const auto& f : e->elems)
        if (!is_atom(f) || !anf_value_ok(f)) return false;
      return true;
    }
    case ExprKind::If:
      return is_atom(e->a) && anf_body_ok(e->b) && anf_body_ok(e->c);
    case ExprKind::Match: {
      if (!is_atom(e->a)) return false;
      for (const auto& clause : e->clauses)
        if (!anf_body_ok(clause.body)) return false;
      return true;
    }
    case ExprKind::RefNew:
    case ExprKind::RefRead:
      return is_atom(e->a);
    case ExprKind::RefWrite:
      return is_atom(e->a) && is_atom(e->b);
    case ExprKind::Let:
      return false;  // nested let in value position is not ANF
  }
  return false;
}

}  // namespace

bool is_anf(const ExprRef& e) {
  if (e->kind == ExprKind::Function) return anf_body_ok(e->a);
  return anf_body_ok(e);
}

}  // namespace microrelay
