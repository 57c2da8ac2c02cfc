// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Online partial evaluator. An interpreter over partially static values
// emits residual code through a let-list, which keeps the output in
// A-normal form and the effect order fixed. References are simulated with
// an explicit store: ref cells always materialize in the residual program
// (so runtime identity exists), reads on known cells short-circuit, and
// any residualized effect conservatively invalidates every cell. A
// post-pass deletes ref cells that are written but never read or escaped.

#include "microrelay/partial_eval.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "microrelay/analysis.hpp"
#include "microrelay/interp.hpp"
#include "microrelay/registry.hpp"

namespace microrelay {

namespace {

struct PStatic;
using PsRef = std::shared_ptr<const PStatic>;

enum class PsKind : uint8_t { Tensor, Tuple, Adt, Closure, OpFn, CtorFn, Ref, Dynamic };

struct PStatic {
  PsKind kind;
  ExprRef residual;  // an atom (or function expr) that rebuilds the value

  TensorLiteral tensor;                                // Tensor
  std::vector<PsRef> fields;                           // Tuple / Adt fields
  std::string name;                                    // Adt ctor / OpFn / CtorFn / global
  std::vector<std::pair<std::string, PsRef>> cl_env;   // Closure capture
  ExprRef fn;                                          // Closure code
  std::string global_name;                             // set when the closure is a global
  int64_t cell = -1;                                   // Ref

  explicit PStatic(PsKind k) : kind(k) {}
};

PsRef ps_tensor(TensorLiteral lit, ExprRef residual) {
  auto p = std::make_shared<PStatic>(PsKind::Tensor);
  p->tensor = std::move(lit);
  p->residual = std::move(residual);
  return p;
}

PsRef ps_dynamic(ExprRef residual) {
  auto p = std::make_shared<PStatic>(PsKind::Dynamic);
  p->residual = std::move(residual);
  return p;
}

struct Cell {
  PsRef value;  // null = unknown at PE time
};

struct LetList {
  NameSupply* names;
  struct Bind {
    std::string var;
    ExprRef value;
    SourceSpan span;
  };
  std::vector<Bind> binds;

  ExprRef emit(ExprRef value, const SourceSpan& span) {
    std::string v = names->fresh();
    binds.push_back({v, std::move(value), span});
    return mk_var(binds.back().var, span);
  }

  ExprRef wrap(ExprRef tail) const {
    ExprRef out = std::move(tail);
    for (auto it = binds.rbegin(); it != binds.rend(); ++it)
      out = mk_let(it->var, it->value, out, nullptr, it->span);
    return out;
  }
};

struct PeEngine {
  const ModuleEnv& m;
  PeOptions opts;
  NameSupply names;
  int64_t fuel;
  std::map<std::string, int> unroll_depth;  // global name -> active partial unrollings
  int inline_depth = 0;
  std::map<int64_t, Cell> store;
  int64_t next_cell = 0;

  using Env = std::vector<std::pair<std::string, PsRef>>;

  PeEngine(const ModuleEnv& mod, PeOptions o, std::vector<ExprRef> seeds)
      : m(mod), opts(o), names(std::move(seeds), "t"), fuel(o.fuel) {}

  void charge(const SourceSpan& span) {
    if (--fuel <= 0)
      diag_throw(DiagCode::FuelExhausted, "partial evaluation step budget exhausted", span);
  }

  void invalidate_all() {
    for (auto& [id, cell] : store) cell.value = nullptr;
  }

  static const PsRef* env_find(const Env& env, const std::string& name) {
    for (auto it = env.rbegin(); it != env.rend(); ++it)
      if (it->first == name) return &it->second;
    return nullptr;
  }

  bool fully_static(const PsRef& p) const {
    switch (p->kind) {
      case PsKind::Dynamic:
        return false;
      case PsKind::Tensor:
      case PsKind::OpFn:
      case PsKind::CtorFn:
      case PsKind::Closure:
      case PsKind::Ref:
        return true;
      case PsKind::Tuple:
      case PsKind::Adt: {
        for (const auto& f : p->fields)
          if (!fully_static(f)) return false;
        return true;
      }
    }
    return false;
  }

  // ---- static value <-> interpreter value bridges ----

  ValueRef to_value(const PsRef& p) const {
    switch (p->kind) {
      case PsKind::Tensor:
        return make_tensor_value(p->tensor);
      case PsKind::Tuple: {
        std::vector<ValueRef> fields;
        for (const auto& f : p->fields) {
          ValueRef v = to_value(f);
          if (!v) return nullptr;
          fields.push_back(v);
        }
        return make_tuple_value(std::move(fields));
      }
      default:
        return nullptr;  // only tensor-ish data feeds operator kernels
    }
  }

  PsRef from_value(const ValueRef& v, const SourceSpan& span, LetList& ll) {
    if (v->kind == ValueKind::Tensor) return ps_tensor(v->tensor, mk_const(v->tensor, span));
    if (v->kind == ValueKind::Tuple) {
      auto p = std::make_shared<PStatic>(PsKind::Tuple);
      std::vector<ExprRef> fields_res;
      for (const auto& f : v->fields) {
        PsRef fp = from_value(f, span, ll);
        p->fields.push_back(fp);
        fields_res.push_back(fp->residual);
      }
      p->residual = ll.emit(mk_tuple(std::move(fields_res), span), span);
      return p;
    }
    MREL_CHECK(false, "kernel produced a non-data value");
  }

  // ---- evaluation ----

  PsRef eval(const ExprRef& e, Env& env, LetList& ll) {
    charge(e->span);
    switch (e->kind) {
      case ExprKind::LocalVar: {
        const PsRef* p = env_find(env, e->name);
        if (!p) diag_throw(DiagCode::UnboundVariable, "%" + e->name, e->span);
        return *p;
      }
      case ExprKind::GlobalVar: {
        auto p = std::make_shared<PStatic>(PsKind::Closure);
        p->fn = m.global(e->name);
        p->global_name = e->name;
        p->residual = e;
        return p;
      }
      case ExprKind::Constant:
        return ps_tensor(e->literal, e);
      case ExprKind::OperatorRef: {
        auto p = std::make_shared<PStatic>(PsKind::OpFn);
        p->name = e->name;
        p->residual = e;
        return p;
      }
      case ExprKind::ConstructorRef: {
        const AdtConstructor* c = m.find_constructor(e->name);
        if (c && c->field_types.empty()) {
          auto p = std::make_shared<PStatic>(PsKind::Adt);
          p->name = e->name;
          p->residual = e;
          return p;
        }
        auto p = std::make_shared<PStatic>(PsKind::CtorFn);
        p->name = e->name;
        p->residual = e;
        return p;
      }
      case ExprKind::Call:
        return eval_call(e, env, ll);
      case ExprKind::Let: {
        PsRef v = eval(e->a, env, ll);
        env.emplace_back(e->name, v);
        PsRef out = eval(e->b, env, ll);
        env.pop_back();
        return out;
      }
      case ExprKind::Function:
        return eval_function(e, env, ll);
      case ExprKind::Tuple: {
        auto p = std::make_shared<PStatic>(PsKind::Tuple);
        std::vector<ExprRef> fields_res;
        for (const auto& f : e->elems) {
          PsRef fp = eval(f, env, ll);
          p->fields.push_back(fp);
          fields_res.push_back(fp->residual);
        }
        p->residual = ll.emit(mk_tuple(std::move(fields_res), e->span), e->span);
        return p;
      }
      case ExprKind::Projection: {
        PsRef t = eval(e->a, env, ll);
        if (t->kind == PsKind::Tuple) {
          if (e->index >= static_cast<int64_t>(t->fields.size()))
            diag_throw(DiagCode::TypeMismatch, "projection out of range", e->span);
          return t->fields[e->index];
        }
        return ps_dynamic(ll.emit(mk_proj(t->residual, e->index, e->span), e->span));
      }
      case ExprKind::If: {
        PsRef c = eval(e->a, env, ll);
        if (c->kind == PsKind::Tensor) {
          bool taken = c->tensor.get_int(0) != 0;
          return eval(taken ? e->b : e->c, env, ll);
        }
        ExprRef then_blk = eval_branch(e->b, env);
        ExprRef else_blk = eval_branch(e->c, env);
        invalidate_all();
        return ps_dynamic(
            ll.emit(mk_if(c->residual, then_blk, else_blk, e->span), e->span));
      }
      case ExprKind::Match:
        return eval_match(e, env, ll);
      case ExprKind::RefNew: {
        PsRef v = eval(e->a, env, ll);
        ExprRef rvar = ll.emit(mk_ref_new(v->residual, e->span), e->span);
        auto p = std::make_shared<PStatic>(PsKind::Ref);
        p->cell = next_cell++;
        p->residual = rvar;
        store[p->cell] = Cell{v};
        return p;
      }
      case ExprKind::RefRead: {
        PsRef r = eval(e->a, env, ll);
        if (r->kind == PsKind::Ref) {
          auto it = store.find(r->cell);
          if (it != store.end() && it->second.value) return it->second.value;
        }
        return ps_dynamic(ll.emit(mk_ref_read(r->residual, e->span), e->span));
      }
      case ExprKind::RefWrite: {
        PsRef r = eval(e->a, env, ll);
        PsRef v = eval(e->b, env, ll);
        ExprRef unit = ll.emit(mk_ref_write(r->residual, v->residual, e->span), e->span);
        if (r->kind == PsKind::Ref) {
          store[r->cell] = Cell{v};
        } else {
          invalidate_all();
        }
        auto p = std::make_shared<PStatic>(PsKind::Tuple);
        p->residual = unit;
        return p;
      }
    }
    MREL_CHECK(false, "bad expr in PE");
  }

  // A branch that may or may not run: evaluate against a copy of the store
  // and throw the speculative effects away.
  ExprRef eval_branch(const ExprRef& body, Env& env) {
    auto saved_store = store;
    LetList sub{&names};
    PsRef out = eval(body, env, sub);
    store = std::move(saved_store);
    return sub.wrap(out->residual);
  }

  PsRef eval_function(const ExprRef& e, Env& env, LetList&) {
    // Specialize the body once with all parameters dynamic to produce the
    // residual function; keep the original code for precise inlining.
    auto saved_store = store;
    Env body_env = env;
    for (const auto& p : e->params) body_env.emplace_back(p.name, ps_dynamic(mk_var(p.name)));
    LetList sub{&names};
    PsRef body = eval(e->a, body_env, sub);
    store = std::move(saved_store);
    ExprRef residual_fn = mk_fn(e->params, sub.wrap(body->residual), e->ret_type, e->type_params,
                                e->attrs, e->span);

    auto p = std::make_shared<PStatic>(PsKind::Closure);
    p->cl_env = env;
    p->fn = e;
    p->residual = residual_fn;
    return p;
  }

  PsRef eval_call(const ExprRef& e, Env& env, LetList& ll) {
    PsRef callee = eval(e->a, env, ll);
    std::vector<PsRef> args;
    for (const auto& arg : e->elems) args.push_back(eval(arg, env, ll));

    auto residual_call = [&](bool invalidates) -> PsRef {
      std::vector<ExprRef> arg_res;
      for (const auto& a : args) arg_res.push_back(a->residual);
      ExprRef call =
          mk_call(callee->residual, std::move(arg_res), e->attrs, e->type_args, e->span);
      if (invalidates) invalidate_all();
      return ps_dynamic(ll.emit(call, e->span));
    };

    switch (callee->kind) {
      case PsKind::OpFn: {
        bool all_static = true;
        std::vector<ValueRef> vals;
        for (const auto& a : args) {
          ValueRef v = to_value(a);
          if (!v) {
            all_static = false;
            break;
          }
          vals.push_back(v);
        }
        const auto* decl = m.registry->find(callee->name);
        bool runnable = decl != nullptr;
        if (runnable && decl->name == "simulated_quantize" && !e->attrs.count("scale"))
          runnable = false;
        if (all_static && runnable) {
          try {
            ValueRef result = eval_kernel(*decl, vals, e->attrs, e->span);
            return from_value(result, e->span, ll);
          } catch (const Diagnostic&) {
            // Keep runtime traps at runtime.
          }
        }
        return residual_call(/*invalidates=*/false);  // operators are pure
      }
      case PsKind::CtorFn: {
        auto p = std::make_shared<PStatic>(PsKind::Adt);
        p->name = callee->name;
        std::vector<ExprRef> arg_res;
        for (const auto& a : args) {
          p->fields.push_back(a);
          arg_res.push_back(a->residual);
        }
        p->residual =
            ll.emit(mk_call(mk_ctor(callee->name, e->span), std::move(arg_res), {}, {}, e->span),
                    e->span);
        return p;
      }
      case PsKind::Closure: {
        const ExprRef& fn = callee->fn;
        if (fn->params.size() != args.size())
          diag_throw(DiagCode::ArityMismatch, "call arity mismatch", e->span);
        size_t static_args = 0;
        for (const auto& a : args)
          if (fully_static(a)) ++static_args;

        // Fully dynamic applications are residualized.
        if (static_args == 0 && !args.empty()) return residual_call(true);

        bool all_static = static_args == args.size();
        const std::string& gname = callee->global_name;
        if (!all_static && !gname.empty()) {
          int& depth = unroll_depth[gname];
          if (depth >= opts.max_unroll_depth) return residual_call(true);
          ++depth;
          PsRef out = inline_call(callee, args, e->span, ll);
          --depth;
          return out;
        }
        return inline_call(callee, args, e->span, ll);
      }
      default:
        return residual_call(true);
    }
  }

  PsRef inline_call(const PsRef& callee, const std::vector<PsRef>& args, const SourceSpan& span,
                    LetList& ll) {
    if (++inline_depth > 2000)
      diag_throw(DiagCode::FuelExhausted, "partial evaluation inlining too deep", span);
    Env call_env = callee->cl_env;
    for (size_t i = 0; i < args.size(); ++i)
      call_env.emplace_back(callee->fn->params[i].name, args[i]);
    PsRef out = eval(callee->fn->a, call_env, ll);
    --inline_depth;
    return out;
  }

  PsRef eval_match(const ExprRef& e, Env& env, LetList& ll) {
    PsRef scrut = eval(e->a, env, ll);
    if (scrut->kind != PsKind::Dynamic) {
      for (const auto& clause : e->clauses) {
        Env clause_env = env;
        if (match_static(clause.pattern, scrut, &clause_env))
          return eval(clause.body, clause_env, ll);
      }
      // A static value with no matching clause traps at runtime; keep the
      // match in the residual program.
    }
    std::vector<MatchClause> clauses;
    for (const auto& clause : e->clauses) {
      Env clause_env = env;
      std::function<void(const PatternRef&)> bind_dynamic = [&](const PatternRef& p) {
        if (p->kind == PatternKind::Var)
          clause_env.emplace_back(p->name, ps_dynamic(mk_var(p->name, p->span)));
        for (const auto& s : p->subpats) bind_dynamic(s);
      };
      bind_dynamic(clause.pattern);
      auto saved_store = store;
      LetList sub{&names};
      PsRef body = eval(clause.body, clause_env, sub);
      store = std::move(saved_store);
      clauses.push_back({clause.pattern, sub.wrap(body->residual)});
    }
    invalidate_all();
    return ps_dynamic(ll.emit(mk_match(scrut->residual, std::move(clauses), e->span), e->span));
  }

  bool match_static(const PatternRef& pat, const PsRef& v, Env* env) {
    switch (pat->kind) {
      case PatternKind::Wildcard:
        return true;
      case PatternKind::Var:
        env->emplace_back(pat->name, v);
        return true;
      case PatternKind::Tuple: {
        if (v->kind != PsKind::Tuple || v->fields.size() != pat->subpats.size()) return false;
        for (size_t i = 0; i < pat->subpats.size(); ++i)
          if (!match_static(pat->subpats[i], v->fields[i], env)) return false;
        return true;
      }
      case PatternKind::Constructor: {
        if (v->kind != PsKind::Adt || v->name != pat->name) return false;
        if (v->fields.size() != pat->subpats.size()) return false;
        for (size_t i = 0; i < pat->subpats.size(); ++i)
          if (!match_static(pat->subpats[i], v->fields[i], env)) return false;
        return true;
      }
    }
    return false;
  }
};

// ---- post-pass: drop ref cells that are written but never read or escaped ----

void count_var_uses(const ExprRef& e, std::map<std::string, int>* total,
                    std::map<std::string, int>* as_write_target) {
  if (!e) return;
  if (e->kind == ExprKind::LocalVar) {
    ++(*total)[e->name];
    return;
  }
  if (e->kind == ExprKind::RefWrite && e->a->kind == ExprKind::LocalVar) {
    ++(*total)[e->a->name];
    ++(*as_write_target)[e->a->name];
    count_var_uses(e->b, total, as_write_target);
    return;
  }
  count_var_uses(e->a, total, as_write_target);
  count_var_uses(e->b, total, as_write_target);
  count_var_uses(e->c, total, as_write_target);
  for (const auto& x : e->elems) count_var_uses(x, total, as_write_target);
  for (const auto& clause : e->clauses) count_var_uses(clause.body, total, as_write_target);
}

ExprRef strip_one_dead_ref_layer(const ExprRef& e, bool* changed);

ExprRef strip_in_children(const ExprRef& e, bool* changed) {
  auto copy = std::make_shared<Expr>(*e);
  copy->checked_type = nullptr;
  if (e->a) copy->a = strip_one_dead_ref_layer(e->a, changed);
  if (e->b) copy->b = strip_one_dead_ref_layer(e->b, changed);
  if (e->c) copy->c = strip_one_dead_ref_layer(e->c, changed);
  copy->elems.clear();
  for (const auto& x : e->elems) copy->elems.push_back(strip_one_dead_ref_layer(x, changed));
  copy->clauses.clear();
  for (const auto& clause : e->clauses)
    copy->clauses.push_back({clause.pattern, strip_one_dead_ref_layer(clause.body, changed)});
  return copy;
}

ExprRef strip_one_dead_ref_layer(const ExprRef& e, bool* changed) {
  if (!e) return e;
  if (e->kind != ExprKind::Let) return strip_in_children(e, changed);

  // Work over a whole block at once so use counts see the full scope.
  std::map<std::string, int> total, writes;
  ExprRef cur = e;
  std::vector<std::tuple<std::string, ExprRef, SourceSpan>> binds;
  while (cur->kind == ExprKind::Let) {
    binds.emplace_back(cur->name, cur->a, cur->span);
    cur = cur->b;
  }
  for (const auto& [name, value, span] : binds) count_var_uses(value, &total, &writes);
  count_var_uses(cur, &total, &writes);

  std::set<std::string> dead_refs;
  std::set<std::string> dead_write_binders;
  for (const auto& [name, value, span] : binds) {
    if (value->kind != ExprKind::RefNew) continue;
    int t = total.count(name) ? total.at(name) : 0;
    int w = writes.count(name) ? writes.at(name) : 0;
    if (t == w) dead_refs.insert(name);
  }
  if (!dead_refs.empty()) {
    for (const auto& [name, value, span] : binds) {
      if (value->kind == ExprKind::RefWrite && value->a->kind == ExprKind::LocalVar &&
          dead_refs.count(value->a->name)) {
        // The write's own unit result must be unused for the drop.
        int uses = total.count(name) ? total.at(name) : 0;
        if (uses == 0) dead_write_binders.insert(name);
      }
    }
    // Only elide a ref if every write to it can go too.
    for (const auto& [name, value, span] : binds) {
      if (value->kind == ExprKind::RefWrite && value->a->kind == ExprKind::LocalVar &&
          dead_refs.count(value->a->name) && !dead_write_binders.count(name)) {
        dead_refs.erase(value->a->name);
      }
    }
  }

  ExprRef out = strip_in_children(cur, changed);
  for (auto it = binds.rbegin(); it != binds.rend(); ++it) {
    const auto& [name, value, span] = *it;
    bool drop = false;
    if (value->kind == ExprKind::RefNew && dead_refs.count(name)) drop = true;
    if (value->kind == ExprKind::RefWrite && value->a->kind == ExprKind::LocalVar &&
        dead_refs.count(value->a->name) && dead_write_binders.count(name))
      drop = true;
    if (drop) {
      *changed = true;
      continue;
    }
    out = mk_let(name, strip_one_dead_ref_layer(value, changed), out, nullptr, span);
  }
  return out;
}

ExprRef elide_private_refs(ExprRef e) {
  for (;;) {
    bool changed = false;
    e = strip_one_dead_ref_layer(e, &changed);
    if (!changed) return e;
  }
}

}  // namespace

ModuleEnv partial_eval(const ModuleEnv& m, const PeOptions& opts) {
  ModuleEnv out = m;
  std::vector<ExprRef> seeds;
  for (const auto& [name, fn] : m.globals) seeds.push_back(fn);

  for (auto& [name, fn] : out.globals) {
    if (fn_is_primitive(fn)) continue;
    PeEngine engine(m, opts, seeds);
    PeEngine::Env env;
    for (const auto& p : fn->params) env.emplace_back(p.name, ps_dynamic(mk_var(p.name)));
    LetList ll{&engine.names};
    PsRef body = engine.eval(fn->a, env, ll);
    ExprRef new_body = elide_private_refs(ll.wrap(body->residual));
    fn = mk_fn(fn->params, new_body, fn->ret_type, fn->type_params, fn->attrs, fn->span);
  }
  return out;
}

}  // namespace microrelay
