// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0
//
// General-purpose passes (constant folding, DCE, CSE) and the pass
// pipeline driver. Type inference re-runs between passes.

#include "microrelay/passes.hpp"

#include <algorithm>
#include <unordered_map>

#include "microrelay/analysis.hpp"
#include "microrelay/fuse.hpp"
#include "microrelay/infer.hpp"
#include "microrelay/interp.hpp"
#include "microrelay/partial_eval.hpp"
#include "microrelay/quantize.hpp"
#include "microrelay/registry.hpp"

namespace microrelay {

bool is_effect_free(const ExprRef& e, const OpRegistry& registry) {
  if (!e) return true;
  switch (e->kind) {
    case ExprKind::LocalVar:
    case ExprKind::GlobalVar:
    case ExprKind::Constant:
    case ExprKind::OperatorRef:
    case ExprKind::ConstructorRef:
    case ExprKind::Function:  // closure creation is pure
      return true;
    case ExprKind::Call: {
      // Registry operators are pure; any other callee may recurse or touch
      // the store, so it stays.
      if (e->a->kind != ExprKind::OperatorRef &&
          e->a->kind != ExprKind::ConstructorRef)
        return false;
      for (const auto& arg : e->elems)
        if (!is_effect_free(arg, registry)) return false;
      return true;
    }
    case ExprKind::Let:
      return is_effect_free(e->a, registry) && is_effect_free(e->b, registry);
    case ExprKind::Tuple: {
      for (const auto& f : e->elems)
        if (!is_effect_free(f, registry)) return false;
      return true;
    }
    case ExprKind::Projection:
      return is_effect_free(e->a, registry);
    case ExprKind::If:
      return is_effect_free(e->a, registry) && is_effect_free(e->b, registry) &&
             is_effect_free(e->c, registry);
    case ExprKind::Match: {
      if (!is_effect_free(e->a, registry)) return false;
      for (const auto& clause : e->clauses)
        if (!is_effect_free(clause.body, registry)) return false;
      return true;
    }
    case ExprKind::RefNew:
    case ExprKind::RefRead:
    case ExprKind::RefWrite:
      return false;
  }
  return false;
}

// ---- constant folding -------------------------------------------------------

namespace {

struct ConstFolder {
  const ModuleEnv& m;
  // let-bound constants currently in scope
  std::vector<std::pair<std::string, ValueRef>> consts;

  const ValueRef* lookup(const std::string& name) const {
    for (auto it = consts.rbegin(); it != consts.rend(); ++it)
      if (it->first == name) return &it->second;
    return nullptr;
  }

  void shadow(const std::string& name) { consts.emplace_back(name, nullptr); }

  ValueRef as_const_value(const ExprRef& e) const {
    if (e->kind == ExprKind::Constant) return make_tensor_value(e->literal);
    if (e->kind == ExprKind::LocalVar) {
      const ValueRef* v = lookup(e->name);
      if (v && *v) return *v;
    }
    if (e->kind == ExprKind::Tuple) {
      std::vector<ValueRef> fields;
      for (const auto& f : e->elems) {
        ValueRef v = as_const_value(f);
        if (!v) return nullptr;
        fields.push_back(v);
      }
      return make_tuple_value(std::move(fields));
    }
    return nullptr;
  }

  static ExprRef value_to_expr(const ValueRef& v, const SourceSpan& span) {
    if (v->kind == ValueKind::Tensor) return mk_const(v->tensor, span);
    if (v->kind == ValueKind::Tuple) {
      std::vector<ExprRef> fields;
      for (const auto& f : v->fields) {
        ExprRef fe = value_to_expr(f, span);
        if (!fe) return nullptr;
        fields.push_back(fe);
      }
      return mk_tuple(std::move(fields), span);
    }
    return nullptr;
  }

  bool foldable_op(const ExprRef& call) const {
    const auto* decl = m.registry->find(call->a->name);
    if (!decl) return false;
    // A simulated_quantize with no calibrated scale cannot run yet.
    if (decl->name == "simulated_quantize" && !call->attrs.count("scale")) return false;
    return true;
  }

  ExprRef run(const ExprRef& e) {
    switch (e->kind) {
      case ExprKind::LocalVar:
      case ExprKind::GlobalVar:
      case ExprKind::Constant:
      case ExprKind::OperatorRef:
      case ExprKind::ConstructorRef:
        return e;
      case ExprKind::Call: {
        auto copy = std::make_shared<Expr>(*e);
        copy->checked_type = nullptr;
        copy->a = run(e->a);
        copy->elems.clear();
        for (const auto& arg : e->elems) copy->elems.push_back(run(arg));
        if (copy->a->kind == ExprKind::OperatorRef && foldable_op(copy)) {
          std::vector<ValueRef> args;
          bool all_const = true;
          for (const auto& arg : copy->elems) {
            ValueRef v = as_const_value(arg);
            if (!v) {
              all_const = false;
              break;
            }
            args.push_back(v);
          }
          if (all_const) {
            try {
              ValueRef result =
                  eval_kernel(m.registry->get(copy->a->name), args, copy->attrs, e->span);
              if (ExprRef folded = value_to_expr(result, e->span)) return folded;
            } catch (const Diagnostic&) {
              // Runtime trap on constant inputs (e.g. divide by zero):
              // leave the call in place so the trap stays a runtime event.
            }
          }
        }
        return copy;
      }
      case ExprKind::Let: {
        ExprRef value = run(e->a);
        if (value->kind == ExprKind::Constant) {
          consts.emplace_back(e->name, make_tensor_value(value->literal));
        } else {
          ValueRef tv = value->kind == ExprKind::Tuple ? as_const_value(value) : nullptr;
          consts.emplace_back(e->name, tv);
        }
        ExprRef body = run(e->b);
        consts.pop_back();
        return mk_let(e->name, value, body, e->annotation, e->span);
      }
      case ExprKind::Function: {
        size_t mark = consts.size();
        for (const auto& p : e->params) shadow(p.name);
        ExprRef body = run(e->a);
        consts.resize(mark);
        return mk_fn(e->params, body, e->ret_type, e->type_params, e->attrs, e->span);
      }
      case ExprKind::Tuple: {
        std::vector<ExprRef> fields;
        for (const auto& f : e->elems) fields.push_back(run(f));
        return mk_tuple(std::move(fields), e->span);
      }
      case ExprKind::Projection:
        return mk_proj(run(e->a), e->index, e->span);
      case ExprKind::If:
        return mk_if(run(e->a), run(e->b), run(e->c), e->span);
      case ExprKind::Match: {
        ExprRef scrut = run(e->a);
        std::vector<MatchClause> clauses;
        for (const auto& clause : e->clauses) {
          size_t mark = consts.size();
          std::function<void(const PatternRef&)> shadow_pat = [&](const PatternRef& p) {
            if (p->kind == PatternKind::Var) shadow(p->name);
            for (const auto& s : p->subpats) shadow_pat(s);
          };
          shadow_pat(clause.pattern);
          clauses.push_back({clause.pattern, run(clause.body)});
          consts.resize(mark);
        }
        return mk_match(scrut, std::move(clauses), e->span);
      }
      case ExprKind::RefNew:
        return mk_ref_new(run(e->a), e->span);
      case ExprKind::RefRead:
        return mk_ref_read(run(e->a), e->span);
      case ExprKind::RefWrite:
        return mk_ref_write(run(e->a), run(e->b), e->span);
    }
    return e;
  }
};

}  // namespace

ModuleEnv constant_fold(const ModuleEnv& m) {
  ModuleEnv out = m;
  for (auto& [name, fn] : out.globals) {
    ConstFolder folder{out};
    fn = folder.run(fn);
  }
  return out;
}

// ---- dead code elimination ----------------------------------------------------

namespace {

ExprRef dce_expr(const ExprRef& e, const OpRegistry& registry) {
  switch (e->kind) {
    case ExprKind::LocalVar:
    case ExprKind::GlobalVar:
    case ExprKind::Constant:
    case ExprKind::OperatorRef:
    case ExprKind::ConstructorRef:
      return e;
    case ExprKind::Let: {
      ExprRef body = dce_expr(e->b, registry);
      ExprRef value = dce_expr(e->a, registry);
      auto fv = free_vars(body);
      bool used = std::find(fv.begin(), fv.end(), e->name) != fv.end();
      if (!used && is_effect_free(value, registry)) return body;
      return mk_let(e->name, value, body, e->annotation, e->span);
    }
    case ExprKind::Function:
      return mk_fn(e->params, dce_expr(e->a, registry), e->ret_type, e->type_params, e->attrs,
                   e->span);
    case ExprKind::Call: {
      auto copy = std::make_shared<Expr>(*e);
      copy->checked_type = nullptr;
      copy->a = dce_expr(e->a, registry);
      copy->elems.clear();
      for (const auto& arg : e->elems) copy->elems.push_back(dce_expr(arg, registry));
      return copy;
    }
    case ExprKind::Tuple: {
      std::vector<ExprRef> fields;
      for (const auto& f : e->elems) fields.push_back(dce_expr(f, registry));
      return mk_tuple(std::move(fields), e->span);
    }
    case ExprKind::Projection:
      return mk_proj(dce_expr(e->a, registry), e->index, e->span);
    case ExprKind::If:
      return mk_if(dce_expr(e->a, registry), dce_expr(e->b, registry), dce_expr(e->c, registry),
                   e->span);
    case ExprKind::Match: {
      std::vector<MatchClause> clauses;
      for (const auto& clause : e->clauses)
        clauses.push_back({clause.pattern, dce_expr(clause.body, registry)});
      return mk_match(dce_expr(e->a, registry), std::move(clauses), e->span);
    }
    case ExprKind::RefNew:
      return mk_ref_new(dce_expr(e->a, registry), e->span);
    case ExprKind::RefRead:
      return mk_ref_read(dce_expr(e->a, registry), e->span);
    case ExprKind::RefWrite:
      return mk_ref_write(dce_expr(e->a, registry), dce_expr(e->b, registry), e->span);
  }
  return e;
}

}  // namespace

ModuleEnv dead_code_elim(const ModuleEnv& m) {
  ModuleEnv out = m;
  for (auto& [name, fn] : out.globals) fn = dce_expr(fn, *out.registry);
  return out;
}

// ---- common subexpression elimination ------------------------------------------

namespace {

struct CseScope {
  // hash -> candidates (value expr, bound var)
  std::unordered_map<uint64_t, std::vector<std::pair<ExprRef, std::string>>> table;
};

struct Cse {
  const OpRegistry& registry;
  std::vector<std::pair<std::string, std::string>> subst;  // var -> replacement

  std::string resolve(const std::string& name) const {
    std::string cur = name;
    for (;;) {
      bool changed = false;
      for (const auto& [from, to] : subst) {
        if (from == cur) {
          cur = to;
          changed = true;
        }
      }
      if (!changed) return cur;
    }
  }

  ExprRef apply_subst(const ExprRef& e) {
    switch (e->kind) {
      case ExprKind::LocalVar: {
        std::string to = resolve(e->name);
        return to == e->name ? e : mk_var(to, e->span);
      }
      case ExprKind::GlobalVar:
      case ExprKind::Constant:
      case ExprKind::OperatorRef:
      case ExprKind::ConstructorRef:
        return e;
      default: {
        auto copy = std::make_shared<Expr>(*e);
        copy->checked_type = nullptr;
        if (e->a) copy->a = apply_subst(e->a);
        if (e->b) copy->b = apply_subst(e->b);
        if (e->c) copy->c = apply_subst(e->c);
        copy->elems.clear();
        for (const auto& x : e->elems) copy->elems.push_back(apply_subst(x));
        copy->clauses.clear();
        for (const auto& clause : e->clauses)
          copy->clauses.push_back({clause.pattern, apply_subst(clause.body)});
        return copy;
      }
    }
  }

  // Rewrites nested blocks inside a value expression with copies of the
  // scope (bindings from sibling branches never merge).
  ExprRef value_with_nested(const ExprRef& e, const CseScope& scope) {
    switch (e->kind) {
      case ExprKind::Function: {
        CseScope inner = scope;
        return mk_fn(e->params, block(e->a, inner), e->ret_type, e->type_params, e->attrs,
                     e->span);
      }
      case ExprKind::If: {
        CseScope t = scope, f = scope;
        return mk_if(apply_subst(e->a), block(e->b, t), block(e->c, f), e->span);
      }
      case ExprKind::Match: {
        std::vector<MatchClause> clauses;
        for (const auto& clause : e->clauses) {
          CseScope inner = scope;
          clauses.push_back({clause.pattern, block(clause.body, inner)});
        }
        return mk_match(apply_subst(e->a), std::move(clauses), e->span);
      }
      default:
        return apply_subst(e);
    }
  }

  ExprRef block(const ExprRef& e, CseScope& scope) {
    if (e->kind == ExprKind::Let) {
      ExprRef value = value_with_nested(e->a, scope);
      if (is_effect_free(value, registry) && value->kind != ExprKind::Function) {
        uint64_t h = structural_hash(value);
        auto& bucket = scope.table[h];
        for (const auto& [prev, var] : bucket) {
          if (alpha_equal(prev, value)) {
            subst.emplace_back(e->name, var);
            ExprRef body = block(e->b, scope);
            subst.pop_back();
            // The duplicate binding disappears; uses point at the original.
            return body;
          }
        }
        bucket.emplace_back(value, e->name);
      }
      ExprRef body = block(e->b, scope);
      return mk_let(e->name, value, body, e->annotation, e->span);
    }
    return value_with_nested(e, scope);
  }
};

}  // namespace

ModuleEnv common_subexpr_elim(const ModuleEnv& m) {
  ModuleEnv out = to_anf(m);
  for (auto& [name, fn] : out.globals) {
    Cse cse{*out.registry, {}};
    CseScope scope;
    fn = mk_fn(fn->params, cse.block(fn->a, scope), fn->ret_type, fn->type_params, fn->attrs,
               fn->span);
  }
  return out;
}

// ---- pipeline -----------------------------------------------------------------

std::vector<std::string> registered_pass_names() {
  return {"anf",  "fold",       "dce",          "cse",    "fuse", "pe",
          "quantize", "fold-scale", "combine-conv", "layout"};
}

PassContext PassContext::from_pass_list(const std::string& comma_separated) {
  PassContext ctx;
  std::string cur;
  std::vector<std::string> items;
  for (char c : comma_separated) {
    if (c == ',') {
      if (!cur.empty()) items.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) items.push_back(cur);

  auto known = registered_pass_names();
  for (const auto& item : items) {
    std::string name = item;
    AttrMap options;
    auto eq = item.find('=');
    if (eq != std::string::npos) {
      name = item.substr(0, eq);
      options["arg"] = item.substr(eq + 1);
    }
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      std::string valid;
      for (const auto& k : known) valid += (valid.empty() ? "" : ", ") + k;
      diag_throw(DiagCode::UnknownPass, "unknown pass '" + name + "'; valid passes: " + valid);
    }
    ctx.passes.push_back({name, options});
  }
  return ctx;
}

namespace {

ModuleEnv apply_one_pass(const ModuleEnv& m, const PassContext::PassDesc& desc,
                         const PassContext& ctx) {
  const std::string& name = desc.name;
  if (name == "anf") return to_anf(m);
  if (name == "fold") return constant_fold(m);
  if (name == "dce") return dead_code_elim(m);
  if (name == "cse") return common_subexpr_elim(m);
  if (name == "fuse") {
    std::optional<int64_t> depth;
    if (auto v = attr_int_or(ctx.options, "fuse.max_depth", -1); v > 0) depth = v;
    return fuse_ops(m, depth);
  }
  if (name == "pe") {
    PeOptions opts;
    opts.fuel = attr_int_or(ctx.options, "pe.fuel", opts.fuel);
    opts.max_unroll_depth =
        static_cast<int>(attr_int_or(ctx.options, "pe.max_unroll", opts.max_unroll_depth));
    return partial_eval(m, opts);
  }
  if (name == "quantize") {
    QuantConfig cfg;
    cfg.bits = attr_int_or(ctx.options, "quant.bits", cfg.bits);
    cfg.sign = attr_int_or(ctx.options, "quant.sign", cfg.sign);
    ModuleEnv annotated = infer(quant_annotate(m, QuantRules::defaults(), cfg));
    ModuleEnv calibrated = quant_calibrate(annotated, ctx.calibration_inputs, ctx.entry);
    return quant_realize(infer(calibrated), cfg);
  }
  if (name == "fold-scale") return fold_axis_scale(m);
  if (name == "combine-conv") return combine_parallel_conv2d(m);
  if (name == "layout") {
    std::string target = attr_string_or(desc.options, "arg", "NHWC");
    return alter_op_layout(m, target);
  }
  diag_throw(DiagCode::UnknownPass, "unknown pass '" + name + "'");
}

}  // namespace

ModuleEnv run_pipeline(const ModuleEnv& m, const PassContext& ctx) {
  ModuleEnv cur = infer(m);
  for (const auto& desc : ctx.passes) {
    try {
      cur = apply_one_pass(cur, desc, ctx);
      cur = infer(cur);  // re-typecheck between passes
    } catch (const Diagnostic& d) {
      throw Diagnostic(d.code(), "in pass '" + desc.name + "': " + d.message(), d.span());
    }
  }
  return cur;
}

}  // namespace microrelay
