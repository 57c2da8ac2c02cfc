// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#include "microrelay/registry.hpp"

#include <algorithm>
#include <mutex>

#include "kernels.hpp"

namespace microrelay {

const char* fusion_pattern_name(FusionPattern p) {
  switch (p) {
    case FusionPattern::Elementwise: return "Elementwise";
    case FusionPattern::Broadcast: return "Broadcast";
    case FusionPattern::Injective: return "Injective";
    case FusionPattern::Reduction: return "Reduction";
    case FusionPattern::ComplexOutFusable: return "ComplexOutFusable";
    case FusionPattern::Opaque: return "Opaque";
  }
  return "?";
}

void OpRegistry::register_op(OperatorDecl decl) {
  if (ops_.count(decl.name))
    diag_throw(DiagCode::DuplicateOperator, "operator " + decl.name + " is already registered");
  if (!relation_exists(decl.relation))
    diag_throw(DiagCode::UnknownOperator,
               "operator " + decl.name + " references unknown relation " + decl.relation);
  ops_.emplace(decl.name, std::move(decl));
}

const OperatorDecl* OpRegistry::find(const std::string& name) const {
  auto it = ops_.find(name);
  return it == ops_.end() ? nullptr : &it->second;
}

const OperatorDecl& OpRegistry::get(const std::string& name, const SourceSpan& span) const {
  const auto* d = find(name);
  if (!d) diag_throw(DiagCode::UnknownOperator, name + " is not a registered operator", span);
  return *d;
}

std::vector<std::string> OpRegistry::op_names() const {
  std::vector<std::string> out;
  out.reserve(ops_.size());
  for (const auto& [k, v] : ops_) out.push_back(k);
  return out;
}

// ---- relation helpers ----------------------------------------------------

namespace {

bool contains_hole(const TypeRef& t) { return t && !type_resolved(t); }

/// Compatibility of a computed dim against an already-annotated dim.
/// Mirrors the unifier's shape rule: Any absorbs, Var matches by name,
/// Const must agree. A Var against a Const is accepted axiomatically.
bool dim_compat(const Dim& want, const Dim& have) {
  if (want.is_any() || have.is_any()) return true;
  if (want.is_var() || have.is_var()) {
    if (want.is_var() && have.is_var()) return want.name == have.name;
    return true;
  }
  return want.value == have.value;
}

bool shape_compat(const Shape& a, const Shape& b) {
  if (a.rank() != b.rank()) return false;
  for (size_t i = 0; i < a.rank(); ++i)
    if (!dim_compat(a.dims[i], b.dims[i])) return false;
  return true;
}

bool type_compat(const TypeRef& want, const TypeRef& have) {
  if (!want || !have) return false;
  if (want->kind != have->kind) return false;
  switch (want->kind) {
    case TypeKind::Tensor:
      return want->dtype == have->dtype && shape_compat(want->shape, have->shape);
    case TypeKind::Tuple: {
      if (want->fields.size() != have->fields.size()) return false;
      for (size_t i = 0; i < want->fields.size(); ++i)
        if (!type_compat(want->fields[i], have->fields[i])) return false;
      return true;
    }
    default:
      return type_equal(want, have);
  }
}

struct RelCtx {
  const std::vector<TypeRef>& slots;
  const AttrMap& attrs;
  const SourceSpan& span;

  size_t out_index() const { return slots.size() - 1; }

  /// Returns the input slot as a tensor type; sets *stuck when the slot is
  /// not yet resolved. Non-tensor resolved slots produce Fails via reason.
  const Type* tensor_input(size_t i, bool* stuck, std::string* reason) const {
    const TypeRef& t = resolveable(i);
    if (!t || contains_hole(t)) {
      *stuck = true;
      return nullptr;
    }
    if (t->kind != TypeKind::Tensor) {
      *reason = "argument " + std::to_string(i) + " must be a tensor, got " + type_str(t);
      return nullptr;
    }
    return t.get();
  }

  const TypeRef& resolveable(size_t i) const { return slots[i]; }

  RelationResult finish(TypeRef computed) const {
    const TypeRef& out = slots[out_index()];
    if (!out || contains_hole(out))
      return RelationResult::progress({{out_index(), std::move(computed)}});
    if (type_compat(computed, out)) return RelationResult::holds();
    return RelationResult::fails("result type " + type_str(out) + " does not satisfy computed " +
                                 type_str(computed));
  }
};

struct DimMerge {
  bool ok = true;
  Dim dim = Dim::constant(0);
};

DimMerge merge_dim_broadcast(const Dim& a, const Dim& b) {
  if (a.is_any() || b.is_any()) return {true, Dim::any()};
  if (a.is_const() && b.is_const()) {
    if (a.value == b.value) return {true, a};
    if (a.value == 1) return {true, b};
    if (b.value == 1) return {true, a};
    return {false, {}};
  }
  if (a.is_var() && b.is_var()) {
    if (a.name == b.name) return {true, a};
    return {true, Dim::any()};  // incomparable symbols: dynamic result
  }
  const Dim& var = a.is_var() ? a : b;
  const Dim& cst = a.is_var() ? b : a;
  if (cst.value == 1) return {true, var};
  return {true, cst};  // assume the symbol matches; axiomatic
}

DimMerge merge_dim_equal(const Dim& a, const Dim& b) {
  if (a.is_any() || b.is_any()) return {true, Dim::any()};
  if (a.is_const() && b.is_const()) {
    if (a.value == b.value) return {true, a};
    return {false, {}};
  }
  if (a.is_var() && b.is_var()) {
    if (a.name == b.name) return {true, a};
    return {true, Dim::any()};
  }
  return {true, a.is_const() ? a : b};
}

bool merge_shapes_broadcast(const Shape& a, const Shape& b, Shape* out) {
  size_t rank = std::max(a.rank(), b.rank());
  out->dims.assign(rank, Dim::constant(1));
  for (size_t i = 0; i < rank; ++i) {
    // right-aligned
    Dim da = i < rank - a.rank() ? Dim::constant(1) : a.dims[i - (rank - a.rank())];
    Dim db = i < rank - b.rank() ? Dim::constant(1) : b.dims[i - (rank - b.rank())];
    DimMerge m = merge_dim_broadcast(da, db);
    if (!m.ok) return false;
    out->dims[i] = m.dim;
  }
  return true;
}

RelationResult rel_elementwise(const std::vector<TypeRef>& slots, const AttrMap& attrs,
                               const SourceSpan& span) {
  RelCtx ctx{slots, attrs, span};
  bool stuck = false;
  std::string reason;
  const Type* first = ctx.tensor_input(0, &stuck, &reason);
  if (stuck) return RelationResult::stuck();
  if (!first) return RelationResult::fails(reason);
  Shape shape = first->shape;
  for (size_t i = 1; i + 1 < slots.size(); ++i) {
    const Type* t = ctx.tensor_input(i, &stuck, &reason);
    if (stuck) return RelationResult::stuck();
    if (!t) return RelationResult::fails(reason);
    if (t->dtype != first->dtype)
      return RelationResult::fails("dtype mismatch: " + first->dtype.str() + " vs " +
                                   t->dtype.str());
    if (t->shape.rank() != shape.rank())
      return RelationResult::fails("rank mismatch: " + shape.str() + " vs " + t->shape.str());
    for (size_t d = 0; d < shape.rank(); ++d) {
      DimMerge m = merge_dim_equal(shape.dims[d], t->shape.dims[d]);
      if (!m.ok)
        return RelationResult::fails("shape mismatch: " + shape.str() + " vs " + t->shape.str());
      shape.dims[d] = m.dim;
    }
  }
  return ctx.finish(tensor_type(shape, first->dtype));
}

RelationResult rel_broadcast_impl(const std::vector<TypeRef>& slots, const AttrMap& attrs,
                                  const SourceSpan& span, bool bool_result) {
  RelCtx ctx{slots, attrs, span};
  bool stuck = false;
  std::string reason;
  const Type* a = ctx.tensor_input(0, &stuck, &reason);
  if (stuck) return RelationResult::stuck();
  if (!a) return RelationResult::fails(reason);
  const Type* b = ctx.tensor_input(1, &stuck, &reason);
  if (stuck) return RelationResult::stuck();
  if (!b) return RelationResult::fails(reason);
  if (a->dtype != b->dtype)
    return RelationResult::fails("dtype mismatch: " + a->dtype.str() + " vs " + b->dtype.str());
  Shape out;
  if (!merge_shapes_broadcast(a->shape, b->shape, &out))
    return RelationResult::fails("shapes " + a->shape.str() + " and " + b->shape.str() +
                                 " are not broadcast-compatible");
  BaseType out_dtype = bool_result ? BaseType::boolean() : a->dtype;
  return ctx.finish(tensor_type(out, out_dtype));
}

RelationResult rel_broadcast(const std::vector<TypeRef>& s, const AttrMap& a,
                             const SourceSpan& sp) {
  return rel_broadcast_impl(s, a, sp, false);
}

RelationResult rel_broadcast_compare(const std::vector<TypeRef>& s, const AttrMap& a,
                                     const SourceSpan& sp) {
  return rel_broadcast_impl(s, a, sp, true);
}

RelationResult rel_cast(const std::vector<TypeRef>& slots, const AttrMap& attrs,
                        const SourceSpan& span) {
  RelCtx ctx{slots, attrs, span};
  bool stuck = false;
  std::string reason;
  const Type* in = ctx.tensor_input(0, &stuck, &reason);
  if (stuck) return RelationResult::stuck();
  if (!in) return RelationResult::fails(reason);
  BaseType bt;
  std::string name = attr_string(attrs, "dtype", span);
  if (!try_parse_base_type(name, &bt))
    return RelationResult::fails("cast: bad dtype attribute '" + name + "'");
  return ctx.finish(tensor_type(in->shape, bt));
}

RelationResult rel_reshape(const std::vector<TypeRef>& slots, const AttrMap& attrs,
                           const SourceSpan& span) {
  RelCtx ctx{slots, attrs, span};
  bool stuck = false;
  std::string reason;
  const Type* in = ctx.tensor_input(0, &stuck, &reason);
  if (stuck) return RelationResult::stuck();
  if (!in) return RelationResult::fails(reason);
  auto newshape = attr_int_list(attrs, "newshape", span);
  int64_t want = 1;
  for (int64_t d : newshape) {
    if (d < 0) return RelationResult::fails("reshape: negative dim");
    want *= d;
  }
  if (in->shape.all_const()) {
    auto have = in->shape.num_elements();
    if (have && *have != want)
      return RelationResult::fails("reshape: cannot view " + in->shape.str() + " as " +
                                   Shape::of(newshape).str());
  }
  return ctx.finish(tensor_type(Shape::of(newshape), in->dtype));
}

RelationResult rel_transpose(const std::vector<TypeRef>& slots, const AttrMap& attrs,
                             const SourceSpan& span) {
  RelCtx ctx{slots, attrs, span};
  bool stuck = false;
  std::string reason;
  const Type* in = ctx.tensor_input(0, &stuck, &reason);
  if (stuck) return RelationResult::stuck();
  if (!in) return RelationResult::fails(reason);
  size_t rank = in->shape.rank();
  std::vector<int64_t> axes;
  if (auto given = attr_int_list_opt(attrs, "axes")) {
    axes = *given;
  } else {
    for (size_t i = 0; i < rank; ++i) axes.push_back(static_cast<int64_t>(rank - 1 - i));
  }
  if (axes.size() != rank) return RelationResult::fails("transpose: axes/rank mismatch");
  std::vector<bool> seen(rank, false);
  Shape out;
  for (int64_t ax : axes) {
    if (ax < 0 || ax >= static_cast<int64_t>(rank) || seen[ax])
      return RelationResult::fails("transpose: bad axes permutation");
    seen[ax] = true;
    out.dims.push_back(in->shape.dims[ax]);
  }
  return ctx.finish(tensor_type(out, in->dtype));
}

RelationResult rel_squeeze(const std::vector<TypeRef>& slots, const AttrMap& attrs,
                           const SourceSpan& span) {
  RelCtx ctx{slots, attrs, span};
  bool stuck = false;
  std::string reason;
  const Type* in = ctx.tensor_input(0, &stuck, &reason);
  if (stuck) return RelationResult::stuck();
  if (!in) return RelationResult::fails(reason);
  Shape out;
  auto axes = attr_int_list_opt(attrs, "axes");
  for (size_t i = 0; i < in->shape.rank(); ++i) {
    const Dim& d = in->shape.dims[i];
    bool listed = axes && std::find(axes->begin(), axes->end(), static_cast<int64_t>(i)) != axes->end();
    bool drop = axes ? listed : (d.is_const() && d.value == 1);
    if (drop) {
      if (d.is_const() && d.value != 1)
        return RelationResult::fails("squeeze: axis " + std::to_string(i) + " is not 1");
      continue;
    }
    out.dims.push_back(d);
  }
  return ctx.finish(tensor_type(out, in->dtype));
}

RelationResult rel_expand_dims(const std::vector<TypeRef>& slots, const AttrMap& attrs,
                               const SourceSpan& span) {
  RelCtx ctx{slots, attrs, span};
  bool stuck = false;
  std::string reason;
  const Type* in = ctx.tensor_input(0, &stuck, &reason);
  if (stuck) return RelationResult::stuck();
  if (!in) return RelationResult::fails(reason);
  int64_t axis = attr_int(attrs, "axis", span);
  int64_t rank = static_cast<int64_t>(in->shape.rank());
  if (axis < 0 || axis > rank) return RelationResult::fails("expand_dims: axis out of range");
  Shape out = in->shape;
  out.dims.insert(out.dims.begin() + axis, Dim::constant(1));
  return ctx.finish(tensor_type(out, in->dtype));
}

Shape reduce_shape(const Shape& in, const std::vector<int64_t>& axes, bool keepdims) {
  Shape out;
  for (size_t i = 0; i < in.rank(); ++i) {
    bool reduced = std::find(axes.begin(), axes.end(), static_cast<int64_t>(i)) != axes.end();
    if (reduced) {
      if (keepdims) out.dims.push_back(Dim::constant(1));
    } else {
      out.dims.push_back(in.dims[i]);
    }
  }
  return out;
}

std::vector<int64_t> reduce_axes(const Shape& in, const AttrMap& attrs) {
  if (auto axes = attr_int_list_opt(attrs, "axis")) return *axes;
  std::vector<int64_t> all;
  for (size_t i = 0; i < in.rank(); ++i) all.push_back(static_cast<int64_t>(i));
  return all;
}

RelationResult rel_reduce_impl(const std::vector<TypeRef>& slots, const AttrMap& attrs,
                               const SourceSpan& span, bool arg_result) {
  RelCtx ctx{slots, attrs, span};
  bool stuck = false;
  std::string reason;
  const Type* in = ctx.tensor_input(0, &stuck, &reason);
  if (stuck) return RelationResult::stuck();
  if (!in) return RelationResult::fails(reason);
  auto axes = reduce_axes(in->shape, attrs);
  for (int64_t ax : axes)
    if (ax < 0 || ax >= static_cast<int64_t>(in->shape.rank()))
      return RelationResult::fails("reduce: axis out of range");
  bool keepdims = attr_bool_or(attrs, "keepdims", false);
  Shape out = reduce_shape(in->shape, axes, keepdims);
  return ctx.finish(tensor_type(out, arg_result ? BaseType::i32() : in->dtype));
}

RelationResult rel_reduce(const std::vector<TypeRef>& s, const AttrMap& a, const SourceSpan& sp) {
  return rel_reduce_impl(s, a, sp, false);
}

RelationResult rel_arg_reduce(const std::vector<TypeRef>& s, const AttrMap& a,
                              const SourceSpan& sp) {
  return rel_reduce_impl(s, a, sp, true);
}

RelationResult rel_dense(const std::vector<TypeRef>& slots, const AttrMap& attrs,
                         const SourceSpan& span) {
  RelCtx ctx{slots, attrs, span};
  bool stuck = false;
  std::string reason;
  const Type* data = ctx.tensor_input(0, &stuck, &reason);
  if (stuck) return RelationResult::stuck();
  if (!data) return RelationResult::fails(reason);
  const Type* weight = ctx.tensor_input(1, &stuck, &reason);
  if (stuck) return RelationResult::stuck();
  if (!weight) return RelationResult::fails(reason);
  if (data->dtype != weight->dtype)
    return RelationResult::fails("dense: dtype mismatch " + data->dtype.str() + " vs " +
                                 weight->dtype.str());
  if (data->shape.rank() != 2 || weight->shape.rank() != 2)
    return RelationResult::fails("dense: expects rank-2 data and weight");
  DimMerge k = merge_dim_equal(data->shape.dims[1], weight->shape.dims[1]);
  if (!k.ok)
    return RelationResult::fails("dense: contraction dims " + data->shape.dims[1].str() + " vs " +
                                 weight->shape.dims[1].str());
  Shape out{{data->shape.dims[0], weight->shape.dims[0]}};
  return ctx.finish(tensor_type(out, data->dtype));
}

RelationResult rel_conv2d(const std::vector<TypeRef>& slots, const AttrMap& attrs,
                          const SourceSpan& span) {
  RelCtx ctx{slots, attrs, span};
  bool stuck = false;
  std::string reason;
  const Type* data = ctx.tensor_input(0, &stuck, &reason);
  if (stuck) return RelationResult::stuck();
  if (!data) return RelationResult::fails(reason);
  const Type* weight = ctx.tensor_input(1, &stuck, &reason);
  if (stuck) return RelationResult::stuck();
  if (!weight) return RelationResult::fails(reason);
  if (data->dtype != weight->dtype) return RelationResult::fails("conv2d: dtype mismatch");
  if (data->shape.rank() != 4 || weight->shape.rank() != 4)
    return RelationResult::fails("conv2d: expects rank-4 data and weight");
  std::string layout = attr_string_or(attrs, "layout", "NCHW");
  if (layout != "NCHW" && layout != "NHWC")
    return RelationResult::fails("conv2d: unsupported layout " + layout);
  auto strides = attr_int_list_opt(attrs, "strides").value_or(std::vector<int64_t>{1, 1});
  auto padding = attr_int_list_opt(attrs, "padding").value_or(std::vector<int64_t>{0, 0});
  if (strides.size() != 2 || padding.size() != 2)
    return RelationResult::fails("conv2d: strides/padding must have 2 entries");
  if (strides[0] < 1 || strides[1] < 1) return RelationResult::fails("conv2d: bad strides");

  // NCHW data with OIHW weights; NHWC data with HWIO weights.
  const bool nchw = layout == "NCHW";
  Dim n = data->shape.dims[0];
  Dim c = nchw ? data->shape.dims[1] : data->shape.dims[3];
  Dim h = nchw ? data->shape.dims[2] : data->shape.dims[1];
  Dim w = nchw ? data->shape.dims[3] : data->shape.dims[2];
  Dim oc = nchw ? weight->shape.dims[0] : weight->shape.dims[3];
  Dim ic = nchw ? weight->shape.dims[1] : weight->shape.dims[2];
  Dim kh = nchw ? weight->shape.dims[2] : weight->shape.dims[0];
  Dim kw = nchw ? weight->shape.dims[3] : weight->shape.dims[1];

  DimMerge cm = merge_dim_equal(c, ic);
  if (!cm.ok)
    return RelationResult::fails("conv2d: input channels " + c.str() + " vs weight " + ic.str());

  auto out_spatial = [&](const Dim& in_d, const Dim& k_d, int64_t stride, int64_t pad) -> DimMerge {
    if (in_d.is_any() || k_d.is_any()) return {true, Dim::any()};
    if (!in_d.is_const() || !k_d.is_const()) return {true, Dim::any()};
    int64_t o = (in_d.value - k_d.value + 2 * pad) / stride + 1;
    if (o < 1) return {false, {}};
    return {true, Dim::constant(o)};
  };
  DimMerge oh = out_spatial(h, kh, strides[0], padding[0]);
  if (!oh.ok) return RelationResult::fails("conv2d: kernel larger than padded input height");
  DimMerge ow = out_spatial(w, kw, strides[1], padding[1]);
  if (!ow.ok) return RelationResult::fails("conv2d: kernel larger than padded input width");

  Shape out;
  if (nchw) {
    out.dims = {n, oc, oh.dim, ow.dim};
  } else {
    out.dims = {n, oh.dim, ow.dim, oc};
  }
  return ctx.finish(tensor_type(out, data->dtype));
}

RelationResult rel_bias_add(const std::vector<TypeRef>& slots, const AttrMap& attrs,
                            const SourceSpan& span) {
  RelCtx ctx{slots, attrs, span};
  bool stuck = false;
  std::string reason;
  const Type* data = ctx.tensor_input(0, &stuck, &reason);
  if (stuck) return RelationResult::stuck();
  if (!data) return RelationResult::fails(reason);
  const Type* bias = ctx.tensor_input(1, &stuck, &reason);
  if (stuck) return RelationResult::stuck();
  if (!bias) return RelationResult::fails(reason);
  if (data->dtype != bias->dtype) return RelationResult::fails("bias_add: dtype mismatch");
  if (bias->shape.rank() != 1) return RelationResult::fails("bias_add: bias must be rank 1");
  int64_t axis = attr_int_or(attrs, "axis", 1);
  if (axis < 0 || axis >= static_cast<int64_t>(data->shape.rank()))
    return RelationResult::fails("bias_add: axis out of range");
  DimMerge m = merge_dim_equal(data->shape.dims[axis], bias->shape.dims[0]);
  if (!m.ok)
    return RelationResult::fails("bias_add: channel dim " + data->shape.dims[axis].str() +
                                 " vs bias " + bias->shape.dims[0].str());
  return ctx.finish(tensor_type(data->shape, data->dtype));
}

RelationResult rel_concat(const std::vector<TypeRef>& slots, const AttrMap& attrs,
                          const SourceSpan& span) {
  RelCtx ctx{slots, attrs, span};
  const TypeRef& in = slots[0];
  if (!in || contains_hole(in)) return RelationResult::stuck();
  if (in->kind != TypeKind::Tuple || in->fields.empty())
    return RelationResult::fails("concat: expects a non-empty tuple of tensors");
  int64_t axis = attr_int_or(attrs, "axis", 0);
  const Type* first = in->fields[0].get();
  if (first->kind != TypeKind::Tensor) return RelationResult::fails("concat: non-tensor field");
  if (axis < 0 || axis >= static_cast<int64_t>(first->shape.rank()))
    return RelationResult::fails("concat: axis out of range");
  Shape out = first->shape;
  bool any_concat = out.dims[axis].is_any();
  int64_t total = out.dims[axis].is_const() ? out.dims[axis].value : 0;
  for (size_t i = 1; i < in->fields.size(); ++i) {
    const Type* t = in->fields[i].get();
    if (t->kind != TypeKind::Tensor) return RelationResult::fails("concat: non-tensor field");
    if (t->dtype != first->dtype) return RelationResult::fails("concat: dtype mismatch");
    if (t->shape.rank() != out.rank()) return RelationResult::fails("concat: rank mismatch");
    for (size_t d = 0; d < out.rank(); ++d) {
      if (static_cast<int64_t>(d) == axis) {
        if (t->shape.dims[d].is_const() && !any_concat) {
          total += t->shape.dims[d].value;
        } else {
          any_concat = true;
        }
        continue;
      }
      DimMerge m = merge_dim_equal(out.dims[d], t->shape.dims[d]);
      if (!m.ok) return RelationResult::fails("concat: non-axis dims differ");
      out.dims[d] = m.dim;
    }
  }
  out.dims[axis] = any_concat || !out.dims[axis].is_const() ? Dim::any() : Dim::constant(total);
  return ctx.finish(tensor_type(out, first->dtype));
}

RelationResult rel_split(const std::vector<TypeRef>& slots, const AttrMap& attrs,
                         const SourceSpan& span) {
  RelCtx ctx{slots, attrs, span};
  bool stuck = false;
  std::string reason;
  const Type* in = ctx.tensor_input(0, &stuck, &reason);
  if (stuck) return RelationResult::stuck();
  if (!in) return RelationResult::fails(reason);
  int64_t axis = attr_int_or(attrs, "axis", 0);
  if (axis < 0 || axis >= static_cast<int64_t>(in->shape.rank()))
    return RelationResult::fails("split: axis out of range");
  auto indices = attr_int_list(attrs, "indices", span);
  const Dim& axdim = in->shape.dims[axis];
  std::vector<TypeRef> parts;
  int64_t prev = 0;
  auto piece = [&](int64_t lo, std::optional<int64_t> hi) -> RelationResult {
    Shape s = in->shape;
    if (!axdim.is_const()) {
      s.dims[axis] = Dim::any();
    } else {
      int64_t end = hi.value_or(axdim.value);
      if (lo > end || end > axdim.value) return RelationResult::fails("split: bad indices");
      s.dims[axis] = Dim::constant(end - lo);
    }
    parts.push_back(tensor_type(s, in->dtype));
    return RelationResult::holds();
  };
  for (int64_t ix : indices) {
    auto r = piece(prev, ix);
    if (r.is_fails()) return r;
    prev = ix;
  }
  auto r = piece(prev, std::nullopt);
  if (r.is_fails()) return r;
  return ctx.finish(tuple_type(std::move(parts)));
}

/// Pass-through relation used by tests registering synthetic operators:
/// every argument must share one shape and dtype, result is the same.
RelationResult rel_identity(const std::vector<TypeRef>& slots, const AttrMap& attrs,
                            const SourceSpan& span) {
  return rel_elementwise(slots, attrs, span);
}

/// Internal relation backing tuple projection in the type checker: slot 0
/// is the tuple, slot 1 the selected field.
RelationResult rel_proj(const std::vector<TypeRef>& slots, const AttrMap& attrs,
                        const SourceSpan& span) {
  RelCtx ctx{slots, attrs, span};
  const TypeRef& in = slots[0];
  if (!in || contains_hole(in)) return RelationResult::stuck();
  if (in->kind != TypeKind::Tuple)
    return RelationResult::fails("projection from non-tuple " + type_str(in));
  int64_t index = attr_int(attrs, "index", span);
  if (index < 0 || index >= static_cast<int64_t>(in->fields.size()))
    return RelationResult::fails("projection index " + std::to_string(index) +
                                 " out of range for " + type_str(in));
  return ctx.finish(in->fields[index]);
}

using RelTable = std::map<std::string, RelationFn>;

const RelTable& relation_table() {
  static const RelTable table = {
      {"Elementwise", rel_elementwise},
      {"Broadcast", rel_broadcast},
      {"BroadcastCompare", rel_broadcast_compare},
      {"Cast", rel_cast},
      {"Reshape", rel_reshape},
      {"Transpose", rel_transpose},
      {"Squeeze", rel_squeeze},
      {"ExpandDims", rel_expand_dims},
      {"Reduce", rel_reduce},
      {"ArgReduce", rel_arg_reduce},
      {"Dense", rel_dense},
      {"Conv2D", rel_conv2d},
      {"BiasAdd", rel_bias_add},
      {"Concat", rel_concat},
      {"Split", rel_split},
      {"Identity", rel_identity},
      {"Proj", rel_proj},
  };
  return table;
}

}  // namespace

bool relation_exists(const std::string& relation) {
  return relation_table().count(relation) > 0;
}

RelationResult apply_relation(const std::string& relation, const std::vector<TypeRef>& slots,
                              const AttrMap& attrs, const SourceSpan& span) {
  auto it = relation_table().find(relation);
  if (it == relation_table().end())
    diag_throw(DiagCode::UnknownOperator, "unknown type relation " + relation, span);
  MREL_CHECK(!slots.empty(), "relation applied to empty slot list");
  return it->second(slots, attrs, span);
}

// ---- builtin operator table ----------------------------------------------

namespace {

std::shared_ptr<OpRegistry> make_builtin_registry() {
  auto reg = std::make_shared<OpRegistry>();
  using FP = FusionPattern;
  auto op = [&](std::string name, size_t arity, std::string relation, FP pattern, KernelFn fn,
                std::map<std::string, AttrKind> schema = {}) {
    reg->register_op(OperatorDecl{std::move(name), arity, std::move(schema), std::move(relation),
                                  pattern, std::move(fn)});
  };

  op("add", 2, "Broadcast", FP::Broadcast, kernels::add);
  op("subtract", 2, "Broadcast", FP::Broadcast, kernels::subtract);
  op("multiply", 2, "Broadcast", FP::Broadcast, kernels::multiply);
  op("divide", 2, "Broadcast", FP::Broadcast, kernels::divide);
  op("min", 2, "Broadcast", FP::Broadcast, kernels::minimum);
  op("max", 2, "Broadcast", FP::Broadcast, kernels::maximum);

  op("equal", 2, "BroadcastCompare", FP::Broadcast, kernels::equal);
  op("not_equal", 2, "BroadcastCompare", FP::Broadcast, kernels::not_equal);
  op("less", 2, "BroadcastCompare", FP::Broadcast, kernels::less);
  op("greater_equal", 2, "BroadcastCompare", FP::Broadcast, kernels::greater_equal);
  op("logical_and", 2, "BroadcastCompare", FP::Broadcast, kernels::logical_and);

  op("negative", 1, "Elementwise", FP::Elementwise, kernels::negative);
  op("exp", 1, "Elementwise", FP::Elementwise, kernels::exp);
  op("tanh", 1, "Elementwise", FP::Elementwise, kernels::tanh);
  op("sigmoid", 1, "Elementwise", FP::Elementwise, kernels::sigmoid);
  op("relu", 1, "Elementwise", FP::Elementwise, kernels::relu);
  op("round", 1, "Elementwise", FP::Elementwise, kernels::round);
  op("clip", 1, "Elementwise", FP::Elementwise, kernels::clip,
     {{"a_min", AttrKind::Float}, {"a_max", AttrKind::Float}});
  op("cast", 1, "Cast", FP::Elementwise, kernels::cast, {{"dtype", AttrKind::String}});
  op("simulated_quantize", 1, "Elementwise", FP::Elementwise, kernels::simulated_quantize,
     {{"bits", AttrKind::Int}, {"sign", AttrKind::Int}, {"scale", AttrKind::Float}});

  op("reshape", 1, "Reshape", FP::Injective, kernels::reshape, {{"newshape", AttrKind::IntList}});
  op("transpose", 1, "Transpose", FP::Injective, kernels::transpose,
     {{"axes", AttrKind::IntList}});
  op("squeeze", 1, "Squeeze", FP::Injective, kernels::squeeze, {{"axes", AttrKind::IntList}});
  op("expand_dims", 1, "ExpandDims", FP::Injective, kernels::expand_dims,
     {{"axis", AttrKind::Int}});

  op("sum", 1, "Reduce", FP::Reduction, kernels::sum,
     {{"axis", AttrKind::IntList}, {"keepdims", AttrKind::Bool}});
  op("max_reduce", 1, "Reduce", FP::Reduction, kernels::max_reduce,
     {{"axis", AttrKind::IntList}, {"keepdims", AttrKind::Bool}});
  op("min_reduce", 1, "Reduce", FP::Reduction, kernels::min_reduce,
     {{"axis", AttrKind::IntList}, {"keepdims", AttrKind::Bool}});
  op("argmax", 1, "ArgReduce", FP::Reduction, kernels::argmax,
     {{"axis", AttrKind::IntList}, {"keepdims", AttrKind::Bool}});

  op("dense", 2, "Dense", FP::ComplexOutFusable, kernels::dense);
  op("conv2d", 2, "Conv2D", FP::ComplexOutFusable, kernels::conv2d,
     {{"strides", AttrKind::IntList},
      {"padding", AttrKind::IntList},
      {"layout", AttrKind::String}});
  // bias_add rides along with the convolution it follows, so it carries the
  // Broadcast pattern (the relation still checks the channel dim).
  op("bias_add", 2, "BiasAdd", FP::Broadcast, kernels::bias_add, {{"axis", AttrKind::Int}});

  op("concat", 1, "Concat", FP::Injective, kernels::concat, {{"axis", AttrKind::Int}});
  op("split", 1, "Split", FP::Opaque, kernels::split,
     {{"axis", AttrKind::Int}, {"indices", AttrKind::IntList}});

  return reg;
}

}  // namespace

std::shared_ptr<const OpRegistry> builtin_registry() {
  static const std::shared_ptr<const OpRegistry> reg = make_builtin_registry();
  return reg;
}

}  // namespace microrelay
