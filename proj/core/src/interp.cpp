// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#include "microrelay/interp.hpp"

#include <algorithm>

#include "microrelay/analysis.hpp"

namespace microrelay {

struct Interpreter::State {
  std::vector<ValueRef> store;
  int64_t fuel;
  int depth = 0;
};

Interpreter::Interpreter(const ModuleEnv& m, InterpOptions opts)
    : module_(m), opts_(std::move(opts)) {}

ValueRef Interpreter::run(const std::string& entry, const std::vector<ValueRef>& args) {
  State st;
  st.fuel = opts_.fuel;
  ExprRef fn = module_.global(entry);
  return apply(make_closure(nullptr, fn), args, {}, nullptr, st, fn->span);
}

ValueRef Interpreter::eval(const ExprRef& e) {
  State st;
  st.fuel = opts_.fuel;
  return eval_in(e, nullptr, st);
}

namespace {

[[noreturn]] void trap(DiagCode code, const std::string& msg, const SourceSpan& span) {
  diag_throw(code, msg, span);
}

bool scalar_bool_value(const ValueRef& v, const SourceSpan& span) {
  if (!v || v->kind != ValueKind::Tensor || !v->tensor.dtype.is_bool() ||
      v->tensor.num_elements() != 1)
    trap(DiagCode::TypeMismatch, "condition must be a scalar bool tensor", span);
  return v->tensor.get_int(0) != 0;
}

// Closures capture exactly the function's free variables.
EnvRef trim_env(const EnvRef& env, const ExprRef& fn) {
  EnvRef out;
  for (const auto& name : free_vars(fn)) {
    if (const ValueRef* v = env_lookup(env, name)) out = env_bind(out, name, *v);
  }
  return out;
}

}  // namespace

bool Interpreter::match_pattern(const PatternRef& pat, const ValueRef& v, EnvRef* env, State& st) {
  switch (pat->kind) {
    case PatternKind::Wildcard:
      return true;
    case PatternKind::Var:
      *env = env_bind(*env, pat->name, v);
      return true;
    case PatternKind::Tuple: {
      if (v->kind != ValueKind::Tuple || v->fields.size() != pat->subpats.size()) return false;
      for (size_t i = 0; i < pat->subpats.size(); ++i)
        if (!match_pattern(pat->subpats[i], v->fields[i], env, st)) return false;
      return true;
    }
    case PatternKind::Constructor: {
      if (v->kind != ValueKind::Adt || v->name != pat->name) return false;
      if (v->fields.size() != pat->subpats.size()) return false;
      for (size_t i = 0; i < pat->subpats.size(); ++i)
        if (!match_pattern(pat->subpats[i], v->fields[i], env, st)) return false;
      return true;
    }
  }
  return false;
}

ValueRef Interpreter::apply(const ValueRef& callee, const std::vector<ValueRef>& args,
                            const AttrMap& attrs, EnvRef env, State& st, const SourceSpan& span) {
  if (!callee) trap(DiagCode::TypeMismatch, "calling a null value", span);
  switch (callee->kind) {
    case ValueKind::Closure: {
      const ExprRef& fn = callee->fn;
      if (fn->params.size() != args.size())
        trap(DiagCode::ArityMismatch,
             "function expects " + std::to_string(fn->params.size()) + " arguments, got " +
                 std::to_string(args.size()),
             span);
      if (++st.depth > opts_.max_call_depth)
        trap(DiagCode::OutOfFuel, "call depth limit exceeded", span);
      EnvRef call_env = callee->env;
      for (size_t i = 0; i < args.size(); ++i)
        call_env = env_bind(call_env, fn->params[i].name, args[i]);
      ValueRef result = eval_in(fn->a, call_env, st);
      --st.depth;
      return result;
    }
    case ValueKind::OpClosure: {
      const OperatorDecl& decl = module_.registry->get(callee->name, span);
      if (decl.arity != args.size())
        trap(DiagCode::ArityMismatch, decl.name + " arity mismatch", span);
      if (opts_.simq_observer && decl.name == "simulated_quantize" && !args.empty() &&
          args[0]->kind == ValueKind::Tensor) {
        opts_.simq_observer(args[0]->tensor, attrs);
      }
      return decl.eval(args, attrs, span);
    }
    case ValueKind::CtorClosure: {
      const AdtConstructor* c = module_.find_constructor(callee->name);
      if (!c) trap(DiagCode::UnknownConstructor, callee->name, span);
      if (c->field_types.size() != args.size())
        trap(DiagCode::ArityMismatch, callee->name + " field count mismatch", span);
      return make_adt_value(callee->name, args);
    }
    default:
      trap(DiagCode::TypeMismatch, "value is not callable: " + callee->str(), span);
  }
}

ValueRef Interpreter::eval_in(const ExprRef& expr, EnvRef env, State& st) {
  ExprRef e = expr;
  // The loop keeps Let chains and branch tails iterative.
  for (;;) {
    if (--st.fuel <= 0) trap(DiagCode::OutOfFuel, "step budget exhausted", e->span);
    switch (e->kind) {
      case ExprKind::LocalVar: {
        const ValueRef* v = env_lookup(env, e->name);
        if (!v) trap(DiagCode::UnboundVariable, "%" + e->name, e->span);
        return *v;
      }
      case ExprKind::GlobalVar:
        return make_closure(nullptr, module_.global(e->name));
      case ExprKind::Constant:
        return make_tensor_value(e->literal);
      case ExprKind::OperatorRef:
        return make_op_closure(e->name);
      case ExprKind::ConstructorRef: {
        const AdtConstructor* c = module_.find_constructor(e->name);
        if (!c) trap(DiagCode::UnknownConstructor, e->name, e->span);
        if (c->field_types.empty()) return make_adt_value(e->name, {});
        return make_ctor_closure(e->name);
      }
      case ExprKind::Call: {
        ValueRef callee = eval_in(e->a, env, st);
        std::vector<ValueRef> args;
        args.reserve(e->elems.size());
        for (const auto& arg : e->elems) args.push_back(eval_in(arg, env, st));
        return apply(callee, args, e->attrs, env, st, e->span);
      }
      case ExprKind::Let: {
        ValueRef v = eval_in(e->a, env, st);
        env = env_bind(env, e->name, v);
        e = e->b;
        continue;
      }
      case ExprKind::Function:
        return make_closure(trim_env(env, e), e);
      case ExprKind::Tuple: {
        std::vector<ValueRef> fields;
        fields.reserve(e->elems.size());
        for (const auto& f : e->elems) fields.push_back(eval_in(f, env, st));
        return make_tuple_value(std::move(fields));
      }
      case ExprKind::Projection: {
        ValueRef t = eval_in(e->a, env, st);
        if (t->kind != ValueKind::Tuple ||
            e->index >= static_cast<int64_t>(t->fields.size()))
          trap(DiagCode::TypeMismatch, "bad tuple projection", e->span);
        return t->fields[e->index];
      }
      case ExprKind::If: {
        bool cond = scalar_bool_value(eval_in(e->a, env, st), e->a->span);
        e = cond ? e->b : e->c;
        continue;
      }
      case ExprKind::Match: {
        ValueRef scrut = eval_in(e->a, env, st);
        bool matched = false;
        for (const auto& clause : e->clauses) {
          EnvRef clause_env = env;
          if (match_pattern(clause.pattern, scrut, &clause_env, st)) {
            env = clause_env;
            e = clause.body;
            matched = true;
            break;
          }
        }
        if (!matched)
          trap(DiagCode::MatchFailure, "no pattern matched value " + scrut->str(), e->span);
        continue;
      }
      case ExprKind::RefNew: {
        ValueRef init = eval_in(e->a, env, st);
        int64_t id = static_cast<int64_t>(st.store.size());
        st.store.push_back(init);
        return make_ref_cell(id);
      }
      case ExprKind::RefRead: {
        ValueRef r = eval_in(e->a, env, st);
        if (r->kind != ValueKind::RefCell) trap(DiagCode::TypeMismatch, "!non-ref", e->span);
        return st.store[r->cell_id];
      }
      case ExprKind::RefWrite: {
        ValueRef r = eval_in(e->a, env, st);
        if (r->kind != ValueKind::RefCell) trap(DiagCode::TypeMismatch, ":= on non-ref", e->span);
        ValueRef v = eval_in(e->b, env, st);
        st.store[r->cell_id] = v;
        return make_tuple_value({});
      }
    }
  }
}

ValueRef interp(const ModuleEnv& m, const std::string& entry, const std::vector<ValueRef>& args,
                InterpOptions opts) {
  Interpreter in(m, std::move(opts));
  return in.run(entry, args);
}

ValueRef eval_kernel(const OperatorDecl& op, const std::vector<ValueRef>& args,
                     const AttrMap& attrs, const SourceSpan& span) {
  if (op.arity != args.size())
    diag_throw(DiagCode::ArityMismatch, op.name + " arity mismatch", span);
  return op.eval(args, attrs, span);
}

}  // namespace microrelay
