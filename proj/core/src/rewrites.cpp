// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Accelerator-oriented rewrites: axis scale folding, parallel convolution
// combination, and operator layout alteration.

#include <algorithm>
#include <map>
#include <set>

#include "microrelay/analysis.hpp"
#include "microrelay/passes.hpp"
#include "microrelay/registry.hpp"

namespace microrelay {

namespace {

struct Binding {
  std::string name;
  TypeRef annotation;
  ExprRef value;
  SourceSpan span;
};

std::pair<std::vector<Binding>, ExprRef> split_block(const ExprRef& block) {
  std::vector<Binding> binds;
  ExprRef cur = block;
  while (cur->kind == ExprKind::Let) {
    binds.push_back({cur->name, cur->annotation, cur->a, cur->span});
    cur = cur->b;
  }
  return {std::move(binds), cur};
}

ExprRef join_block(const std::vector<Binding>& binds, const ExprRef& tail) {
  ExprRef out = tail;
  for (auto it = binds.rbegin(); it != binds.rend(); ++it)
    out = mk_let(it->name, it->value, out, it->annotation, it->span);
  return out;
}

bool is_opcall(const ExprRef& e, const char* op) {
  return e->kind == ExprKind::Call && e->a->kind == ExprKind::OperatorRef && e->a->name == op;
}

template <typename Fn>
ExprRef map_blocks(const ExprRef& e, Fn&& on_block);

template <typename Fn>
ExprRef map_blocks_nested(const ExprRef& e, Fn&& on_block) {
  switch (e->kind) {
    case ExprKind::Function:
      return mk_fn(e->params, map_blocks(e->a, on_block), e->ret_type, e->type_params, e->attrs,
                   e->span);
    case ExprKind::If:
      return mk_if(e->a, map_blocks(e->b, on_block), map_blocks(e->c, on_block), e->span);
    case ExprKind::Match: {
      std::vector<MatchClause> clauses;
      for (const auto& clause : e->clauses)
        clauses.push_back({clause.pattern, map_blocks(clause.body, on_block)});
      return mk_match(e->a, std::move(clauses), e->span);
    }
    default:
      return e;
  }
}

template <typename Fn>
ExprRef map_blocks(const ExprRef& e, Fn&& on_block) {
  auto [binds, tail] = split_block(e);
  for (auto& b : binds) b.value = map_blocks_nested(b.value, on_block);
  ExprRef new_tail = map_blocks_nested(tail, on_block);
  return on_block(join_block(binds, new_tail));
}

// ---- axis scale folding -----------------------------------------------------

struct ScaleInfo {
  ExprRef data;          // the unscaled input atom
  TensorLiteral weight_scale;  // literal reshaped for the weight side
};

// Channel axis of conv2d data/output for a layout.
int64_t channel_axis(const std::string& layout) { return layout == "NHWC" ? 3 : 1; }

// Accepts a scale constant that broadcasts along the channel axis of a
// rank-4 tensor (or a scalar). Returns the channel count (0 = scalar).
bool scale_shape_ok(const TensorLiteral& c, int64_t axis, int64_t* channels) {
  auto dims = c.shape.to_ints();
  if (dims.empty() || c.num_elements() == 1) {
    *channels = 0;
    return true;
  }
  // Right-align against rank 4 and require the only non-1 dim at `axis`.
  if (dims.size() > 4) return false;
  std::vector<int64_t> full(4, 1);
  std::copy(dims.begin(), dims.end(), full.begin() + (4 - dims.size()));
  for (int64_t i = 0; i < 4; ++i) {
    if (i == axis) continue;
    if (full[i] != 1) return false;
  }
  *channels = full[axis];
  return true;
}

TensorLiteral reshape_literal(const TensorLiteral& c, std::vector<int64_t> dims) {
  TensorLiteral out = c;
  out.shape = Shape::of(std::move(dims));
  return out;
}

struct ScaleFolder {
  const ModuleEnv& m;
  bool changed = false;

  const TensorLiteral* const_of(const ExprRef& atom,
                                const std::map<std::string, TensorLiteral>& consts) const {
    if (atom->kind == ExprKind::Constant) return &atom->literal;
    if (atom->kind == ExprKind::LocalVar) {
      auto it = consts.find(atom->name);
      if (it != consts.end()) return &it->second;
    }
    return nullptr;
  }

  // multiply(x, c) / multiply(c, x) with c constant -> (x, c)
  bool match_scale_mul(const ExprRef& e, const std::map<std::string, TensorLiteral>& consts,
                       ExprRef* x, TensorLiteral* c) const {
    if (!is_opcall(e, "multiply")) return false;
    if (const TensorLiteral* lit = const_of(e->elems[1], consts)) {
      *x = e->elems[0];
      *c = *lit;
      return true;
    }
    if (const TensorLiteral* lit = const_of(e->elems[0], consts)) {
      *x = e->elems[1];
      *c = *lit;
      return true;
    }
    return false;
  }

  ExprRef run_block(const ExprRef& block) {
    auto [binds, tail] = split_block(block);
    std::map<std::string, TensorLiteral> consts;
    std::map<std::string, size_t> bind_index;
    std::map<std::string, int> use_count;
    for (size_t i = 0; i < binds.size(); ++i) {
      bind_index[binds[i].name] = i;
      if (binds[i].value->kind == ExprKind::Constant) consts[binds[i].name] = binds[i].value->literal;
      for (const auto& v : free_vars(binds[i].value)) ++use_count[v];
    }
    for (const auto& v : free_vars(tail)) ++use_count[v];

    for (auto& b : binds) {
      // Pre-conv scale: conv2d(multiply(x, c), w) -> conv2d(x, multiply(w, c')).
      if (is_opcall(b.value, "conv2d")) {
        std::string layout = attr_string_or(b.value->attrs, "layout", "NCHW");
        const ExprRef& data_atom = b.value->elems[0];
        ExprRef mul_expr;
        if (data_atom->kind == ExprKind::LocalVar && bind_index.count(data_atom->name))
          mul_expr = binds[bind_index[data_atom->name]].value;
        if (!mul_expr) continue;
        ExprRef x;
        TensorLiteral c;
        if (!match_scale_mul(mul_expr, consts, &x, &c)) continue;
        int64_t channels = 0;
        if (!scale_shape_ok(c, channel_axis(layout), &channels)) continue;
        // Weight-side alignment: the scale multiplies the input-channel axis
        // (OIHW axis 1; HWIO axis 2).
        TensorLiteral cw = c;
        if (channels > 0)
          cw = reshape_literal(c, layout == "NHWC" ? std::vector<int64_t>{channels, 1}
                                                   : std::vector<int64_t>{1, channels, 1, 1});
        else if (!c.shape.is_scalar())
          cw = reshape_literal(c, {});
        ExprRef new_w = mk_opcall("multiply", {b.value->elems[1], mk_const(cw, b.span)}, {}, b.span);
        auto call = std::make_shared<Expr>(*b.value);
        call->checked_type = nullptr;
        call->elems = {x, new_w};
        b.value = call;
        changed = true;
        continue;
      }
      // Post-conv scale: multiply(conv2d(...), c) with a single-use conv.
      ExprRef x;
      TensorLiteral c;
      if (match_scale_mul(b.value, consts, &x, &c) && x->kind == ExprKind::LocalVar &&
          bind_index.count(x->name) && use_count[x->name] == 1) {
        const ExprRef conv = binds[bind_index[x->name]].value;
        if (!is_opcall(conv, "conv2d")) continue;
        std::string layout = attr_string_or(conv->attrs, "layout", "NCHW");
        int64_t channels = 0;
        if (!scale_shape_ok(c, channel_axis(layout), &channels)) continue;
        // Output-channel axis of the weight (OIHW axis 0; HWIO axis 3).
        TensorLiteral cw = c;
        if (channels > 0)
          cw = reshape_literal(c, layout == "NHWC" ? std::vector<int64_t>{channels}
                                                   : std::vector<int64_t>{channels, 1, 1, 1});
        else if (!c.shape.is_scalar())
          cw = reshape_literal(c, {});
        ExprRef new_w =
            mk_opcall("multiply", {conv->elems[1], mk_const(cw, b.span)}, {}, b.span);
        auto call = std::make_shared<Expr>(*conv);
        call->checked_type = nullptr;
        call->elems = {conv->elems[0], new_w};
        b.value = call;
        changed = true;
        continue;
      }
    }
    return join_block(binds, tail);
  }
};

}  // namespace

ModuleEnv fold_axis_scale(const ModuleEnv& m) {
  ModuleEnv out = to_anf(m);
  for (auto& [name, fn] : out.globals) {
    for (;;) {
      ScaleFolder folder{out};
      ExprRef body = map_blocks(fn->a, [&](const ExprRef& b) { return folder.run_block(b); });
      fn = mk_fn(fn->params, body, fn->ret_type, fn->type_params, fn->attrs, fn->span);
      if (!folder.changed) break;
      // Re-normalize the weight-side multiply so chained scales fold on the
      // next round.
      fn = to_anf(fn);
    }
  }
  return out;
}

// ---- parallel convolution combination -----------------------------------------

namespace {

struct ConvKey {
  std::string data;
  std::string attrs_sig;
  std::vector<int64_t> kernel_hw;
  std::string dtype;

  bool operator<(const ConvKey& o) const {
    return std::tie(data, attrs_sig, kernel_hw, dtype) <
           std::tie(o.data, o.attrs_sig, o.kernel_hw, o.dtype);
  }
};

// Weight shape taken from a constant literal or the inferred type.
bool weight_shape(const ExprRef& w, const std::map<std::string, TensorLiteral>& consts,
                  std::vector<int64_t>* dims, std::string* dtype) {
  auto from_type = [&](const TypeRef& t) {
    if (!t || t->kind != TypeKind::Tensor || !t->shape.all_const()) return false;
    *dims = t->shape.to_ints();
    *dtype = t->dtype.str();
    return true;
  };
  if (w->kind == ExprKind::Constant) {
    *dims = w->literal.shape.to_ints();
    *dtype = w->literal.dtype.str();
    return true;
  }
  if (w->checked_type && from_type(w->checked_type)) return true;
  if (w->kind == ExprKind::LocalVar) {
    auto it = consts.find(w->name);
    if (it != consts.end()) {
      *dims = it->second.shape.to_ints();
      *dtype = it->second.dtype.str();
      return true;
    }
  }
  return false;
}

struct CombineState {
  NameSupply* names;
  bool changed = false;

  ExprRef run_block(const ExprRef& block) {
    auto [binds, tail] = split_block(block);
    std::map<std::string, TensorLiteral> consts;
    for (const auto& b : binds)
      if (b.value->kind == ExprKind::Constant) consts[b.name] = b.value->literal;

    // Candidate groups by (shared input, geometry).
    std::map<ConvKey, std::vector<size_t>> groups;
    for (size_t i = 0; i < binds.size(); ++i) {
      const ExprRef& v = binds[i].value;
      if (!is_opcall(v, "conv2d")) continue;
      if (v->elems[0]->kind != ExprKind::LocalVar) continue;
      std::string layout = attr_string_or(v->attrs, "layout", "NCHW");
      if (layout != "NCHW") continue;  // combining is defined on NCHW here
      std::vector<int64_t> wd;
      std::string dtype;
      if (!weight_shape(v->elems[1], consts, &wd, &dtype) || wd.size() != 4) continue;
      ConvKey key;
      key.data = v->elems[0]->name;
      for (const auto& [k, val] : v->attrs) key.attrs_sig += k + "=" + attr_value_str(val) + ";";
      key.kernel_hw = {wd[1], wd[2], wd[3]};  // in-channels + kernel size must agree
      key.dtype = dtype;
      groups[key].push_back(i);
    }

    std::map<size_t, std::vector<size_t>> plans;  // last member index -> member list
    std::set<size_t> consumed;
    for (auto& [key, idxs] : groups) {
      if (idxs.size() < 2) continue;
      // A member is unsafe if its var is used before the last member binds.
      std::vector<size_t> members = idxs;
      for (;;) {
        size_t last = members.back();
        std::vector<size_t> safe;
        for (size_t mi : members) {
          bool used_early = false;
          for (size_t j = mi + 1; j <= last && !used_early; ++j) {
            if (j >= binds.size()) break;
            if (std::find(members.begin(), members.end(), j) != members.end()) continue;
            for (const auto& fv : free_vars(binds[j].value))
              if (fv == binds[mi].name) used_early = true;
          }
          if (!used_early) safe.push_back(mi);
        }
        if (safe.size() == members.size()) break;
        members = std::move(safe);
        if (members.size() < 2) break;
      }
      if (members.size() < 2) continue;
      plans[members.back()] = members;
      for (size_t mi : members) consumed.insert(mi);
    }
    if (plans.empty()) return join_block(binds, tail);
    changed = true;

    std::vector<Binding> out_binds;
    for (size_t i = 0; i < binds.size(); ++i) {
      auto plan = plans.find(i);
      if (plan == plans.end()) {
        if (!consumed.count(i)) out_binds.push_back(binds[i]);
        continue;
      }
      const std::vector<size_t>& members = plan->second;
      const ExprRef& proto = binds[members[0]].value;
      // Concatenate weights along the output-channel axis (OIHW axis 0).
      std::vector<ExprRef> weights;
      std::vector<int64_t> split_indices;
      int64_t running = 0;
      std::map<std::string, TensorLiteral> consts2 = consts;
      for (size_t mi : members) {
        const ExprRef& call = binds[mi].value;
        weights.push_back(call->elems[1]);
        std::vector<int64_t> wd;
        std::string dt;
        weight_shape(call->elems[1], consts2, &wd, &dt);
        running += wd[0];
        split_indices.push_back(running);
      }
      split_indices.pop_back();  // split points exclude the total

      SourceSpan span = binds[i].span;
      std::string wcat = names->fresh();
      out_binds.push_back(
          {wcat, nullptr,
           mk_opcall("concat", {mk_tuple(weights, span)}, {{"axis", int64_t{0}}}, span), span});
      std::string ycat = names->fresh();
      {
        auto call = std::make_shared<Expr>(*proto);
        call->checked_type = nullptr;
        call->elems = {proto->elems[0], mk_var(wcat, span)};
        out_binds.push_back({ycat, nullptr, call, span});
      }
      std::string parts = names->fresh();
      AttrMap split_attrs;
      split_attrs["axis"] = int64_t{1};
      split_attrs["indices"] = split_indices;
      out_binds.push_back(
          {parts, nullptr, mk_opcall("split", {mk_var(ycat, span)}, std::move(split_attrs), span),
           span});
      for (size_t k = 0; k < members.size(); ++k) {
        const Binding& mb = binds[members[k]];
        out_binds.push_back({mb.name, mb.annotation,
                             mk_proj(mk_var(parts, span), static_cast<int64_t>(k), span), mb.span});
      }
    }
    return join_block(out_binds, tail);
  }
};

}  // namespace

ModuleEnv combine_parallel_conv2d(const ModuleEnv& m) {
  ModuleEnv out = to_anf(m);
  for (auto& [name, fn] : out.globals) {
    NameSupply names({fn}, "c");
    CombineState st{&names};
    ExprRef body = map_blocks(fn->a, [&](const ExprRef& b) { return st.run_block(b); });
    fn = mk_fn(fn->params, body, fn->ret_type, fn->type_params, fn->attrs, fn->span);
  }
  return out;
}

// ---- layout alteration ----------------------------------------------------------

namespace {

template <typename Fn>
ExprRef rewrite_all_calls(const ExprRef& e, Fn&& on_call) {
  if (!e) return e;
  switch (e->kind) {
    case ExprKind::LocalVar:
    case ExprKind::GlobalVar:
    case ExprKind::Constant:
    case ExprKind::OperatorRef:
    case ExprKind::ConstructorRef:
      return e;
    default: {
      auto copy = std::make_shared<Expr>(*e);
      copy->checked_type = nullptr;
      if (e->a) copy->a = rewrite_all_calls(e->a, on_call);
      if (e->b) copy->b = rewrite_all_calls(e->b, on_call);
      if (e->c) copy->c = rewrite_all_calls(e->c, on_call);
      copy->elems.clear();
      for (const auto& x : e->elems) copy->elems.push_back(rewrite_all_calls(x, on_call));
      copy->clauses.clear();
      for (const auto& clause : e->clauses)
        copy->clauses.push_back({clause.pattern, rewrite_all_calls(clause.body, on_call)});
      if (copy->kind == ExprKind::Call) return on_call(std::static_pointer_cast<const Expr>(copy));
      return copy;
    }
  }
}

ExprRef transpose_expr(const ExprRef& x, std::vector<int64_t> axes, const SourceSpan& span) {
  return mk_opcall("transpose", {x}, {{"axes", std::move(axes)}}, span);
}

}  // namespace

ModuleEnv alter_op_layout(const ModuleEnv& m, const std::string& target_layout) {
  if (target_layout != "NCHW" && target_layout != "NHWC")
    diag_throw(DiagCode::UnsupportedLayout, "unsupported layout " + target_layout);
  ModuleEnv out = m;
  for (auto& [name, fn] : out.globals) {
    fn = rewrite_all_calls(fn, [&](const ExprRef& call) -> ExprRef {
      if (!is_opcall(call, "conv2d")) return call;
      std::string layout = attr_string_or(call->attrs, "layout", "NCHW");
      if (layout == target_layout) return call;
      const SourceSpan& span = call->span;
      AttrMap attrs = call->attrs;
      attrs["layout"] = target_layout;
      if (target_layout == "NHWC") {
        // NCHW data -> NHWC; OIHW weights -> HWIO; result back to NCHW.
        ExprRef d = transpose_expr(call->elems[0], {0, 2, 3, 1}, span);
        ExprRef w = transpose_expr(call->elems[1], {2, 3, 1, 0}, span);
        ExprRef y = mk_call(call->a, {d, w}, attrs, call->type_args, span);
        return transpose_expr(y, {0, 3, 1, 2}, span);
      }
      // NHWC data -> NCHW; HWIO weights -> OIHW; result back to NHWC.
      ExprRef d = transpose_expr(call->elems[0], {0, 3, 1, 2}, span);
      ExprRef w = transpose_expr(call->elems[1], {3, 2, 0, 1}, span);
      ExprRef y = mk_call(call->a, {d, w}, attrs, call->type_args, span);
      return transpose_expr(y, {0, 2, 3, 1}, span);
    });
  }
  return out;
}

}  // namespace microrelay
