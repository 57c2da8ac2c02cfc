// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Direct-loop reference semantics for the builtin operators. Reductions and
// contractions accumulate sequentially in row-major order so results are
// bitwise reproducible. float32 tensors compute in float precision.

#include "kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace microrelay::kernels {

namespace {

const TensorLiteral& as_tensor(const ValueRef& v, const SourceSpan& span, const char* who) {
  if (!v || v->kind != ValueKind::Tensor)
    diag_throw(DiagCode::TypeMismatch, std::string(who) + ": expected a tensor argument", span);
  return v->tensor;
}

std::vector<int64_t> row_major_strides(const std::vector<int64_t>& dims) {
  std::vector<int64_t> s(dims.size(), 1);
  for (size_t i = dims.size(); i-- > 1;) s[i - 1] = s[i] * dims[i];
  return s;
}

bool next_coord(std::vector<int64_t>& coord, const std::vector<int64_t>& dims) {
  for (size_t i = dims.size(); i-- > 0;) {
    if (++coord[i] < dims[i]) return true;
    coord[i] = 0;
  }
  return false;
}

}  // namespace

int64_t wrap_int(int64_t v, const BaseType& bt) {
  if (bt.code == TypeCode::Bool) return v != 0 ? 1 : 0;
  if (bt.bits >= 64) return v;
  const uint64_t mask = (uint64_t{1} << bt.bits) - 1;
  uint64_t u = static_cast<uint64_t>(v) & mask;
  if (bt.code == TypeCode::Int) {
    const uint64_t sign_bit = uint64_t{1} << (bt.bits - 1);
    if (u & sign_bit) u |= ~mask;
  }
  return static_cast<int64_t>(u);
}

namespace {

// ---- broadcasting elementwise machinery ----------------------------------

std::vector<int64_t> broadcast_dims(const std::vector<int64_t>& a, const std::vector<int64_t>& b,
                                    const SourceSpan& span, const char* who) {
  size_t rank = std::max(a.size(), b.size());
  std::vector<int64_t> out(rank, 1);
  for (size_t i = 0; i < rank; ++i) {
    int64_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    int64_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (da == db || db == 1) {
      out[i] = da;
    } else if (da == 1) {
      out[i] = db;
    } else {
      diag_throw(DiagCode::TypeMismatch,
                 std::string(who) + ": shapes not broadcast-compatible at runtime", span);
    }
  }
  return out;
}

int64_t broadcast_source_index(const std::vector<int64_t>& coord,
                               const std::vector<int64_t>& src_dims,
                               const std::vector<int64_t>& src_strides) {
  size_t off = coord.size() - src_dims.size();
  int64_t idx = 0;
  for (size_t i = 0; i < src_dims.size(); ++i) {
    int64_t c = src_dims[i] == 1 ? 0 : coord[off + i];
    idx += c * src_strides[i];
  }
  return idx;
}

struct BinKernel {
  // Either may be null when the dtype class cannot occur for the op.
  int64_t (*on_int)(int64_t, int64_t, const SourceSpan&);
  double (*on_float)(double, double, const SourceSpan&);
};

ValueRef binary_broadcast(const char* who, const std::vector<ValueRef>& args,
                          const SourceSpan& span, BinKernel k, bool bool_result) {
  const TensorLiteral& a = as_tensor(args[0], span, who);
  const TensorLiteral& b = as_tensor(args[1], span, who);
  if (a.dtype != b.dtype)
    diag_throw(DiagCode::TypeMismatch, std::string(who) + ": dtype mismatch", span);
  auto ad = a.shape.to_ints();
  auto bd = b.shape.to_ints();
  auto od = broadcast_dims(ad, bd, span, who);
  auto as = row_major_strides(ad);
  auto bs = row_major_strides(bd);

  TensorLiteral out = TensorLiteral::zeros(Shape::of(od), bool_result ? BaseType::boolean() : a.dtype);
  int64_t n = out.num_elements();
  std::vector<int64_t> coord(od.size(), 0);

  const bool is_float = a.dtype.is_float();
  for (int64_t i = 0; i < n; ++i) {
    int64_t ia = broadcast_source_index(coord, ad, as);
    int64_t ib = broadcast_source_index(coord, bd, bs);
    if (is_float) {
      double r = k.on_float(a.get_double(ia), b.get_double(ib), span);
      if (bool_result) {
        out.ints()[i] = r != 0.0 ? 1 : 0;
      } else if (a.dtype.bits == 64) {
        out.f64s()[i] = r;
      } else {
        out.f32s()[i] = static_cast<float>(
            k.on_float(static_cast<float>(a.f32s()[ia]), static_cast<float>(b.f32s()[ib]), span));
      }
    } else {
      int64_t r = k.on_int(a.ints()[ia], b.ints()[ib], span);
      out.ints()[i] = bool_result ? (r != 0 ? 1 : 0) : wrap_int(r, a.dtype);
    }
    next_coord(coord, od);
  }
  return make_tensor_value(std::move(out));
}

struct UnKernel {
  int64_t (*on_int)(int64_t, const SourceSpan&);
  double (*on_d)(double, const SourceSpan&);
  float (*on_f)(float, const SourceSpan&);
};

ValueRef unary_map(const char* who, const std::vector<ValueRef>& args, const SourceSpan& span,
                   UnKernel k) {
  const TensorLiteral& a = as_tensor(args[0], span, who);
  TensorLiteral out = a;
  int64_t n = out.num_elements();
  if (a.dtype.is_float()) {
    if (a.dtype.bits == 64) {
      for (int64_t i = 0; i < n; ++i) out.f64s()[i] = k.on_d(a.f64s()[i], span);
    } else {
      for (int64_t i = 0; i < n; ++i) out.f32s()[i] = k.on_f(a.f32s()[i], span);
    }
  } else {
    for (int64_t i = 0; i < n; ++i) out.ints()[i] = wrap_int(k.on_int(a.ints()[i], span), a.dtype);
  }
  return make_tensor_value(std::move(out));
}

}  // namespace

// ---- arithmetic -----------------------------------------------------------

ValueRef add(const std::vector<ValueRef>& a, const AttrMap&, const SourceSpan& s) {
  return binary_broadcast("add", a, s,
                          {[](int64_t x, int64_t y, const SourceSpan&) { return x + y; },
                           [](double x, double y, const SourceSpan&) { return x + y; }},
                          false);
}

ValueRef subtract(const std::vector<ValueRef>& a, const AttrMap&, const SourceSpan& s) {
  return binary_broadcast("subtract", a, s,
                          {[](int64_t x, int64_t y, const SourceSpan&) { return x - y; },
                           [](double x, double y, const SourceSpan&) { return x - y; }},
                          false);
}

ValueRef multiply(const std::vector<ValueRef>& a, const AttrMap&, const SourceSpan& s) {
  return binary_broadcast("multiply", a, s,
                          {[](int64_t x, int64_t y, const SourceSpan&) { return x * y; },
                           [](double x, double y, const SourceSpan&) { return x * y; }},
                          false);
}

ValueRef divide(const std::vector<ValueRef>& a, const AttrMap&, const SourceSpan& s) {
  return binary_broadcast(
      "divide", a, s,
      {[](int64_t x, int64_t y, const SourceSpan& sp) -> int64_t {
         if (y == 0) diag_throw(DiagCode::TrapDivideByZero, "integer division by zero", sp);
         if (y == -1 && x == std::numeric_limits<int64_t>::min()) return x;
         return x / y;
       },
       [](double x, double y, const SourceSpan&) { return x / y; }},
      false);
}

ValueRef minimum(const std::vector<ValueRef>& a, const AttrMap&, const SourceSpan& s) {
  return binary_broadcast("min", a, s,
                          {[](int64_t x, int64_t y, const SourceSpan&) { return std::min(x, y); },
                           [](double x, double y, const SourceSpan&) { return std::fmin(x, y); }},
                          false);
}

ValueRef maximum(const std::vector<ValueRef>& a, const AttrMap&, const SourceSpan& s) {
  return binary_broadcast("max", a, s,
                          {[](int64_t x, int64_t y, const SourceSpan&) { return std::max(x, y); },
                           [](double x, double y, const SourceSpan&) { return std::fmax(x, y); }},
                          false);
}

// ---- comparisons ----------------------------------------------------------

ValueRef equal(const std::vector<ValueRef>& a, const AttrMap&, const SourceSpan& s) {
  return binary_broadcast("equal", a, s,
                          {[](int64_t x, int64_t y, const SourceSpan&) -> int64_t { return x == y; },
                           [](double x, double y, const SourceSpan&) -> double { return x == y; }},
                          true);
}

ValueRef not_equal(const std::vector<ValueRef>& a, const AttrMap&, const SourceSpan& s) {
  return binary_broadcast("not_equal", a, s,
                          {[](int64_t x, int64_t y, const SourceSpan&) -> int64_t { return x != y; },
                           [](double x, double y, const SourceSpan&) -> double { return x != y; }},
                          true);
}

ValueRef less(const std::vector<ValueRef>& a, const AttrMap&, const SourceSpan& s) {
  return binary_broadcast("less", a, s,
                          {[](int64_t x, int64_t y, const SourceSpan&) -> int64_t { return x < y; },
                           [](double x, double y, const SourceSpan&) -> double { return x < y; }},
                          true);
}

ValueRef greater_equal(const std::vector<ValueRef>& a, const AttrMap&, const SourceSpan& s) {
  return binary_broadcast("greater_equal", a, s,
                          {[](int64_t x, int64_t y, const SourceSpan&) -> int64_t { return x >= y; },
                           [](double x, double y, const SourceSpan&) -> double { return x >= y; }},
                          true);
}

ValueRef logical_and(const std::vector<ValueRef>& a, const AttrMap&, const SourceSpan& s) {
  return binary_broadcast(
      "logical_and", a, s,
      {[](int64_t x, int64_t y, const SourceSpan&) -> int64_t { return (x != 0) && (y != 0); },
       [](double x, double y, const SourceSpan&) -> double { return (x != 0) && (y != 0); }},
      true);
}

// ---- elementwise unary -----------------------------------------------------

ValueRef negative(const std::vector<ValueRef>& a, const AttrMap&, const SourceSpan& s) {
  return unary_map("negative", a, s,
                   {[](int64_t x, const SourceSpan&) { return -x; },
                    [](double x, const SourceSpan&) { return -x; },
                    [](float x, const SourceSpan&) { return -x; }});
}

ValueRef exp(const std::vector<ValueRef>& a, const AttrMap&, const SourceSpan& s) {
  return unary_map("exp", a, s,
                   {[](int64_t, const SourceSpan& sp) -> int64_t {
                      diag_throw(DiagCode::TypeMismatch, "exp expects a float tensor", sp);
                    },
                    [](double x, const SourceSpan&) { return std::exp(x); },
                    [](float x, const SourceSpan&) { return std::exp(x); }});
}

ValueRef tanh(const std::vector<ValueRef>& a, const AttrMap&, const SourceSpan& s) {
  return unary_map("tanh", a, s,
                   {[](int64_t, const SourceSpan& sp) -> int64_t {
                      diag_throw(DiagCode::TypeMismatch, "tanh expects a float tensor", sp);
                    },
                    [](double x, const SourceSpan&) { return std::tanh(x); },
                    [](float x, const SourceSpan&) { return std::tanh(x); }});
}

ValueRef sigmoid(const std::vector<ValueRef>& a, const AttrMap&, const SourceSpan& s) {
  return unary_map("sigmoid", a, s,
                   {[](int64_t, const SourceSpan& sp) -> int64_t {
                      diag_throw(DiagCode::TypeMismatch, "sigmoid expects a float tensor", sp);
                    },
                    [](double x, const SourceSpan&) { return 1.0 / (1.0 + std::exp(-x)); },
                    [](float x, const SourceSpan&) { return 1.0f / (1.0f + std::exp(-x)); }});
}

ValueRef relu(const std::vector<ValueRef>& a, const AttrMap&, const SourceSpan& s) {
  return unary_map("relu", a, s,
                   {[](int64_t x, const SourceSpan&) { return std::max<int64_t>(x, 0); },
                    [](double x, const SourceSpan&) { return x > 0 ? x : 0.0; },
                    [](float x, const SourceSpan&) { return x > 0 ? x : 0.0f; }});
}

ValueRef round(const std::vector<ValueRef>& a, const AttrMap&, const SourceSpan& s) {
  // nearbyint under the default FE_TONEAREST mode = round half to even.
  return unary_map("round", a, s,
                   {[](int64_t x, const SourceSpan&) { return x; },
                    [](double x, const SourceSpan&) { return std::nearbyint(x); },
                    [](float x, const SourceSpan&) { return std::nearbyintf(x); }});
}

ValueRef clip(const std::vector<ValueRef>& args, const AttrMap& attrs, const SourceSpan& s) {
  const TensorLiteral& a = as_tensor(args[0], s, "clip");
  double lo = attr_float(attrs, "a_min", s);
  double hi = attr_float(attrs, "a_max", s);
  TensorLiteral out = a;
  int64_t n = out.num_elements();
  if (a.dtype.is_float()) {
    if (a.dtype.bits == 64) {
      for (int64_t i = 0; i < n; ++i) out.f64s()[i] = std::min(std::max(a.f64s()[i], lo), hi);
    } else {
      float flo = static_cast<float>(lo), fhi = static_cast<float>(hi);
      for (int64_t i = 0; i < n; ++i) out.f32s()[i] = std::min(std::max(a.f32s()[i], flo), fhi);
    }
  } else {
    int64_t ilo = static_cast<int64_t>(std::ceil(lo));
    int64_t ihi = static_cast<int64_t>(std::floor(hi));
    for (int64_t i = 0; i < n; ++i)
      out.ints()[i] = std::min(std::max(a.ints()[i], ilo), ihi);
  }
  return make_tensor_value(std::move(out));
}

namespace {

int64_t checked_trunc(double v) {
  if (!(v > -9.2e18 && v < 9.2e18)) return v > 0 ? std::numeric_limits<int64_t>::max()
                                                 : std::numeric_limits<int64_t>::min();
  return static_cast<int64_t>(v);
}

}  // namespace

ValueRef cast(const std::vector<ValueRef>& args, const AttrMap& attrs, const SourceSpan& s) {
  const TensorLiteral& a = as_tensor(args[0], s, "cast");
  BaseType to;
  std::string name = attr_string(attrs, "dtype", s);
  if (!try_parse_base_type(name, &to))
    diag_throw(DiagCode::TypeMismatch, "cast: bad dtype '" + name + "'", s);
  TensorLiteral out = TensorLiteral::zeros(a.shape, to);
  int64_t n = a.num_elements();
  for (int64_t i = 0; i < n; ++i) {
    if (to.is_float()) {
      double v = a.get_double(i);
      if (to.bits == 64) {
        out.f64s()[i] = v;
      } else {
        out.f32s()[i] = static_cast<float>(v);
      }
    } else if (to.is_bool()) {
      out.ints()[i] = a.get_double(i) != 0.0 ? 1 : 0;
    } else {
      int64_t v = a.dtype.is_float() ? checked_trunc(a.get_double(i)) : a.ints()[i];
      out.ints()[i] = wrap_int(v, to);
    }
  }
  return make_tensor_value(std::move(out));
}

ValueRef simulated_quantize(const std::vector<ValueRef>& args, const AttrMap& attrs,
                            const SourceSpan& s) {
  const TensorLiteral& a = as_tensor(args[0], s, "simulated_quantize");
  if (!a.dtype.is_float())
    diag_throw(DiagCode::TypeMismatch, "simulated_quantize expects a float tensor", s);
  int64_t bits = attr_int(attrs, "bits", s);
  int64_t sign = attr_int(attrs, "sign", s);
  auto scale = attr_float_opt(attrs, "scale");
  if (!scale)
    diag_throw(DiagCode::Uncalibrated, "simulated_quantize has no calibrated scale", s);
  TensorLiteral out = a;
  int64_t n = out.num_elements();
  const double two_pow = std::ldexp(1.0, static_cast<int>(bits - sign));
  const double lo = sign ? -std::ldexp(1.0, static_cast<int>(bits - 1)) : 0.0;
  const double hi = sign ? std::ldexp(1.0, static_cast<int>(bits - 1)) - 1 : std::ldexp(1.0, static_cast<int>(bits)) - 1;
  if (a.dtype.bits == 64) {
    for (int64_t i = 0; i < n; ++i) {
      double t = a.f64s()[i] / *scale * two_pow;
      double c = std::min(std::max(std::nearbyint(t), lo), hi);
      out.f64s()[i] = c * *scale / two_pow;
    }
  } else {
    const float fscale = static_cast<float>(*scale);
    const float ftwo = static_cast<float>(two_pow);
    const float flo = static_cast<float>(lo), fhi = static_cast<float>(hi);
    for (int64_t i = 0; i < n; ++i) {
      float t = a.f32s()[i] / fscale * ftwo;
      float c = std::min(std::max(std::nearbyintf(t), flo), fhi);
      out.f32s()[i] = c * fscale / ftwo;
    }
  }
  return make_tensor_value(std::move(out));
}

// ---- data movement ---------------------------------------------------------

ValueRef reshape(const std::vector<ValueRef>& args, const AttrMap& attrs, const SourceSpan& s) {
  const TensorLiteral& a = as_tensor(args[0], s, "reshape");
  auto newshape = attr_int_list(attrs, "newshape", s);
  TensorLiteral out = a;
  out.shape = Shape::of(newshape);
  out.validate(s);
  return make_tensor_value(std::move(out));
}

ValueRef transpose(const std::vector<ValueRef>& args, const AttrMap& attrs, const SourceSpan& s) {
  const TensorLiteral& a = as_tensor(args[0], s, "transpose");
  auto in_dims = a.shape.to_ints();
  size_t rank = in_dims.size();
  std::vector<int64_t> axes;
  if (auto given = attr_int_list_opt(attrs, "axes")) {
    axes = *given;
  } else {
    for (size_t i = 0; i < rank; ++i) axes.push_back(static_cast<int64_t>(rank - 1 - i));
  }
  std::vector<int64_t> out_dims(rank);
  for (size_t i = 0; i < rank; ++i) out_dims[i] = in_dims[axes[i]];
  TensorLiteral out = TensorLiteral::zeros(Shape::of(out_dims), a.dtype);
  auto in_strides = row_major_strides(in_dims);
  std::vector<int64_t> coord(rank, 0);
  int64_t n = out.num_elements();
  for (int64_t i = 0; i < n; ++i) {
    int64_t src = 0;
    for (size_t d = 0; d < rank; ++d) src += coord[d] * in_strides[axes[d]];
    out.set_double(i, 0);
    if (a.dtype.is_float()) {
      if (a.dtype.bits == 64) {
        out.f64s()[i] = a.f64s()[src];
      } else {
        out.f32s()[i] = a.f32s()[src];
      }
    } else {
      out.ints()[i] = a.ints()[src];
    }
    next_coord(coord, out_dims);
  }
  return make_tensor_value(std::move(out));
}

ValueRef squeeze(const std::vector<ValueRef>& args, const AttrMap& attrs, const SourceSpan& s) {
  const TensorLiteral& a = as_tensor(args[0], s, "squeeze");
  auto axes = attr_int_list_opt(attrs, "axes");
  std::vector<int64_t> out_dims;
  auto in_dims = a.shape.to_ints();
  for (size_t i = 0; i < in_dims.size(); ++i) {
    bool listed = axes && std::find(axes->begin(), axes->end(), static_cast<int64_t>(i)) != axes->end();
    bool drop = axes ? listed : in_dims[i] == 1;
    if (drop) {
      if (in_dims[i] != 1)
        diag_throw(DiagCode::TypeMismatch, "squeeze: axis is not 1", s);
      continue;
    }
    out_dims.push_back(in_dims[i]);
  }
  TensorLiteral out = a;
  out.shape = Shape::of(out_dims);
  return make_tensor_value(std::move(out));
}

ValueRef expand_dims(const std::vector<ValueRef>& args, const AttrMap& attrs, const SourceSpan& s) {
  const TensorLiteral& a = as_tensor(args[0], s, "expand_dims");
  int64_t axis = attr_int(attrs, "axis", s);
  auto dims = a.shape.to_ints();
  dims.insert(dims.begin() + axis, 1);
  TensorLiteral out = a;
  out.shape = Shape::of(dims);
  return make_tensor_value(std::move(out));
}

// ---- reductions ------------------------------------------------------------

namespace {

struct ReducePlan {
  std::vector<int64_t> in_dims, out_dims;
  std::vector<int64_t> out_index_of_in;  // per input flat index -> output flat index
};

ReducePlan reduce_plan(const TensorLiteral& a, const AttrMap& attrs, const SourceSpan& s) {
  ReducePlan p;
  p.in_dims = a.shape.to_ints();
  std::vector<int64_t> axes;
  if (auto given = attr_int_list_opt(attrs, "axis")) {
    axes = *given;
  } else {
    for (size_t i = 0; i < p.in_dims.size(); ++i) axes.push_back(static_cast<int64_t>(i));
  }
  bool keepdims = attr_bool_or(attrs, "keepdims", false);
  std::vector<bool> reduced(p.in_dims.size(), false);
  for (int64_t ax : axes) {
    if (ax < 0 || ax >= static_cast<int64_t>(p.in_dims.size()))
      diag_throw(DiagCode::TypeMismatch, "reduce: axis out of range", s);
    reduced[ax] = true;
  }
  for (size_t i = 0; i < p.in_dims.size(); ++i) {
    if (reduced[i]) {
      if (keepdims) p.out_dims.push_back(1);
    } else {
      p.out_dims.push_back(p.in_dims[i]);
    }
  }
  auto out_strides = row_major_strides(p.out_dims);
  int64_t n = 1;
  for (int64_t d : p.in_dims) n *= d;
  p.out_index_of_in.resize(n);
  std::vector<int64_t> coord(p.in_dims.size(), 0);
  for (int64_t i = 0; i < n; ++i) {
    int64_t oi = 0;
    size_t oc = 0;
    for (size_t d = 0; d < p.in_dims.size(); ++d) {
      if (reduced[d]) {
        if (keepdims) ++oc;
        continue;
      }
      oi += coord[d] * out_strides[oc];
      ++oc;
    }
    p.out_index_of_in[i] = oi;
    next_coord(coord, p.in_dims);
  }
  return p;
}

enum class ReduceOp { Sum, Max, Min };

ValueRef reduce_impl(const char* who, ReduceOp op, const std::vector<ValueRef>& args,
                     const AttrMap& attrs, const SourceSpan& s) {
  const TensorLiteral& a = as_tensor(args[0], s, who);
  ReducePlan p = reduce_plan(a, attrs, s);
  TensorLiteral out = TensorLiteral::zeros(Shape::of(p.out_dims), a.dtype);
  int64_t n = a.num_elements();
  std::vector<bool> seeded(out.num_elements(), false);
  for (int64_t i = 0; i < n; ++i) {
    int64_t oi = p.out_index_of_in[i];
    if (a.dtype.is_float() && a.dtype.bits == 32) {
      float v = a.f32s()[i];
      float& acc = out.f32s()[oi];
      if (!seeded[oi]) {
        acc = op == ReduceOp::Sum ? v : v;
      } else if (op == ReduceOp::Sum) {
        acc += v;
      } else if (op == ReduceOp::Max) {
        acc = std::max(acc, v);
      } else {
        acc = std::min(acc, v);
      }
    } else if (a.dtype.is_float()) {
      double v = a.f64s()[i];
      double& acc = out.f64s()[oi];
      if (!seeded[oi]) {
        acc = v;
      } else if (op == ReduceOp::Sum) {
        acc += v;
      } else if (op == ReduceOp::Max) {
        acc = std::max(acc, v);
      } else {
        acc = std::min(acc, v);
      }
    } else {
      int64_t v = a.ints()[i];
      int64_t& acc = out.ints()[oi];
      if (!seeded[oi]) {
        acc = v;
      } else if (op == ReduceOp::Sum) {
        acc = wrap_int(acc + v, a.dtype);
      } else if (op == ReduceOp::Max) {
        acc = std::max(acc, v);
      } else {
        acc = std::min(acc, v);
      }
    }
    seeded[oi] = true;
  }
  // Empty reduction cells keep the zero fill (sum semantics).
  return make_tensor_value(std::move(out));
}

}  // namespace

ValueRef sum(const std::vector<ValueRef>& a, const AttrMap& at, const SourceSpan& s) {
  return reduce_impl("sum", ReduceOp::Sum, a, at, s);
}

ValueRef max_reduce(const std::vector<ValueRef>& a, const AttrMap& at, const SourceSpan& s) {
  return reduce_impl("max_reduce", ReduceOp::Max, a, at, s);
}

ValueRef min_reduce(const std::vector<ValueRef>& a, const AttrMap& at, const SourceSpan& s) {
  return reduce_impl("min_reduce", ReduceOp::Min, a, at, s);
}

ValueRef argmax(const std::vector<ValueRef>& args, const AttrMap& attrs, const SourceSpan& s) {
  const TensorLiteral& a = as_tensor(args[0], s, "argmax");
  ReducePlan p = reduce_plan(a, attrs, s);
  TensorLiteral out = TensorLiteral::zeros(Shape::of(p.out_dims), BaseType::i32());
  std::vector<double> best(out.num_elements(), 0.0);
  std::vector<bool> seeded(out.num_elements(), false);
  // Index within the reduced set, counted in row-major visit order.
  std::vector<int64_t> counter(out.num_elements(), 0);
  int64_t n = a.num_elements();
  for (int64_t i = 0; i < n; ++i) {
    int64_t oi = p.out_index_of_in[i];
    double v = a.get_double(i);
    if (!seeded[oi] || v > best[oi]) {
      best[oi] = v;
      out.ints()[oi] = counter[oi];
      seeded[oi] = true;
    }
    ++counter[oi];
  }
  return make_tensor_value(std::move(out));
}

// ---- contractions ----------------------------------------------------------

ValueRef dense(const std::vector<ValueRef>& args, const AttrMap&, const SourceSpan& s) {
  const TensorLiteral& x = as_tensor(args[0], s, "dense");
  const TensorLiteral& w = as_tensor(args[1], s, "dense");
  auto xd = x.shape.to_ints();
  auto wd = w.shape.to_ints();
  if (xd.size() != 2 || wd.size() != 2 || xd[1] != wd[1])
    diag_throw(DiagCode::TypeMismatch, "dense: shape mismatch", s);
  int64_t n = xd[0], k = xd[1], m = wd[0];
  TensorLiteral out = TensorLiteral::zeros(Shape::of({n, m}), x.dtype);
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < m; ++j) {
      if (x.dtype.is_float() && x.dtype.bits == 32) {
        float acc = 0.0f;
        for (int64_t kk = 0; kk < k; ++kk) acc += x.f32s()[i * k + kk] * w.f32s()[j * k + kk];
        out.f32s()[i * m + j] = acc;
      } else if (x.dtype.is_float()) {
        double acc = 0.0;
        for (int64_t kk = 0; kk < k; ++kk) acc += x.f64s()[i * k + kk] * w.f64s()[j * k + kk];
        out.f64s()[i * m + j] = acc;
      } else {
        int64_t acc = 0;
        for (int64_t kk = 0; kk < k; ++kk)
          acc = wrap_int(acc + wrap_int(x.ints()[i * k + kk] * w.ints()[j * k + kk], x.dtype),
                         x.dtype);
        out.ints()[i * m + j] = acc;
      }
    }
  }
  return make_tensor_value(std::move(out));
}

ValueRef conv2d(const std::vector<ValueRef>& args, const AttrMap& attrs, const SourceSpan& s) {
  const TensorLiteral& x = as_tensor(args[0], s, "conv2d");
  const TensorLiteral& w = as_tensor(args[1], s, "conv2d");
  std::string layout = attr_string_or(attrs, "layout", "NCHW");
  auto strides = attr_int_list_opt(attrs, "strides").value_or(std::vector<int64_t>{1, 1});
  auto padding = attr_int_list_opt(attrs, "padding").value_or(std::vector<int64_t>{0, 0});
  auto xd = x.shape.to_ints();
  auto wd = w.shape.to_ints();
  if (xd.size() != 4 || wd.size() != 4)
    diag_throw(DiagCode::TypeMismatch, "conv2d: rank-4 tensors required", s);
  const bool nchw = layout == "NCHW";
  int64_t N = xd[0];
  int64_t C = nchw ? xd[1] : xd[3];
  int64_t H = nchw ? xd[2] : xd[1];
  int64_t W = nchw ? xd[3] : xd[2];
  int64_t OC = nchw ? wd[0] : wd[3];
  int64_t IC = nchw ? wd[1] : wd[2];
  int64_t KH = nchw ? wd[2] : wd[0];
  int64_t KW = nchw ? wd[3] : wd[1];
  if (C != IC) diag_throw(DiagCode::TypeMismatch, "conv2d: channel mismatch", s);
  int64_t sh = strides[0], sw = strides[1], ph = padding[0], pw = padding[1];
  int64_t OH = (H - KH + 2 * ph) / sh + 1;
  int64_t OW = (W - KW + 2 * pw) / sw + 1;

  auto x_at = [&](int64_t n, int64_t c, int64_t h, int64_t ww) -> int64_t {
    return nchw ? ((n * C + c) * H + h) * W + ww : ((n * H + h) * W + ww) * C + c;
  };
  auto w_at = [&](int64_t oc, int64_t ic, int64_t kh, int64_t kw) -> int64_t {
    return nchw ? ((oc * IC + ic) * KH + kh) * KW + kw : ((kh * KW + kw) * IC + ic) * OC + oc;
  };
  std::vector<int64_t> out_dims =
      nchw ? std::vector<int64_t>{N, OC, OH, OW} : std::vector<int64_t>{N, OH, OW, OC};
  TensorLiteral out = TensorLiteral::zeros(Shape::of(out_dims), x.dtype);
  auto o_at = [&](int64_t n, int64_t oc, int64_t oh, int64_t ow) -> int64_t {
    return nchw ? ((n * OC + oc) * OH + oh) * OW + ow : ((n * OH + oh) * OW + ow) * OC + oc;
  };

  for (int64_t n = 0; n < N; ++n) {
    for (int64_t oc = 0; oc < OC; ++oc) {
      for (int64_t oh = 0; oh < OH; ++oh) {
        for (int64_t ow = 0; ow < OW; ++ow) {
          float facc = 0.0f;
          double dacc = 0.0;
          int64_t iacc = 0;
          for (int64_t ic = 0; ic < C; ++ic) {
            for (int64_t kh = 0; kh < KH; ++kh) {
              for (int64_t kw = 0; kw < KW; ++kw) {
                int64_t h = oh * sh - ph + kh;
                int64_t ww = ow * sw - pw + kw;
                if (h < 0 || h >= H || ww < 0 || ww >= W) continue;
                if (x.dtype.is_float() && x.dtype.bits == 32) {
                  facc += x.f32s()[x_at(n, ic, h, ww)] * w.f32s()[w_at(oc, ic, kh, kw)];
                } else if (x.dtype.is_float()) {
                  dacc += x.f64s()[x_at(n, ic, h, ww)] * w.f64s()[w_at(oc, ic, kh, kw)];
                } else {
                  iacc = wrap_int(
                      iacc + wrap_int(x.ints()[x_at(n, ic, h, ww)] * w.ints()[w_at(oc, ic, kh, kw)],
                                      x.dtype),
                      x.dtype);
                }
              }
            }
          }
          int64_t oi = o_at(n, oc, oh, ow);
          if (x.dtype.is_float() && x.dtype.bits == 32) {
            out.f32s()[oi] = facc;
          } else if (x.dtype.is_float()) {
            out.f64s()[oi] = dacc;
          } else {
            out.ints()[oi] = iacc;
          }
        }
      }
    }
  }
  return make_tensor_value(std::move(out));
}

ValueRef bias_add(const std::vector<ValueRef>& args, const AttrMap& attrs, const SourceSpan& s) {
  const TensorLiteral& x = as_tensor(args[0], s, "bias_add");
  const TensorLiteral& b = as_tensor(args[1], s, "bias_add");
  int64_t axis = attr_int_or(attrs, "axis", 1);
  auto xd = x.shape.to_ints();
  if (axis < 0 || axis >= static_cast<int64_t>(xd.size()) || b.num_elements() != xd[axis])
    diag_throw(DiagCode::TypeMismatch, "bias_add: bias does not match axis", s);
  TensorLiteral out = x;
  auto strides = row_major_strides(xd);
  int64_t n = x.num_elements();
  for (int64_t i = 0; i < n; ++i) {
    int64_t c = (i / strides[axis]) % xd[axis];
    if (x.dtype.is_float() && x.dtype.bits == 32) {
      out.f32s()[i] = x.f32s()[i] + b.f32s()[c];
    } else if (x.dtype.is_float()) {
      out.f64s()[i] = x.f64s()[i] + b.f64s()[c];
    } else {
      out.ints()[i] = wrap_int(x.ints()[i] + b.ints()[c], x.dtype);
    }
  }
  return make_tensor_value(std::move(out));
}

// ---- tuple-shaped ops --------------------------------------------------------

ValueRef concat(const std::vector<ValueRef>& args, const AttrMap& attrs, const SourceSpan& s) {
  if (args.size() != 1 || !args[0] || args[0]->kind != ValueKind::Tuple)
    diag_throw(DiagCode::TypeMismatch, "concat expects a tuple argument", s);
  const auto& fields = args[0]->fields;
  if (fields.empty()) diag_throw(DiagCode::TypeMismatch, "concat of empty tuple", s);
  int64_t axis = attr_int_or(attrs, "axis", 0);
  const TensorLiteral& first = as_tensor(fields[0], s, "concat");
  auto dims = first.shape.to_ints();
  int64_t total = 0;
  for (const auto& f : fields) {
    const TensorLiteral& t = as_tensor(f, s, "concat");
    total += t.shape.to_ints()[axis];
  }
  auto out_dims = dims;
  out_dims[axis] = total;
  TensorLiteral out = TensorLiteral::zeros(Shape::of(out_dims), first.dtype);

  // outer = product of dims before axis; inner = product after.
  int64_t outer = 1, inner = 1;
  for (int64_t i = 0; i < axis; ++i) outer *= dims[i];
  for (size_t i = axis + 1; i < dims.size(); ++i) inner *= dims[i];

  int64_t axis_offset = 0;
  for (const auto& f : fields) {
    const TensorLiteral& t = as_tensor(f, s, "concat");
    int64_t ta = t.shape.to_ints()[axis];
    for (int64_t o = 0; o < outer; ++o) {
      for (int64_t a2 = 0; a2 < ta; ++a2) {
        for (int64_t in = 0; in < inner; ++in) {
          int64_t src = (o * ta + a2) * inner + in;
          int64_t dst = (o * total + axis_offset + a2) * inner + in;
          if (first.dtype.is_float() && first.dtype.bits == 32) {
            out.f32s()[dst] = t.f32s()[src];
          } else if (first.dtype.is_float()) {
            out.f64s()[dst] = t.f64s()[src];
          } else {
            out.ints()[dst] = t.ints()[src];
          }
        }
      }
    }
    axis_offset += ta;
  }
  return make_tensor_value(std::move(out));
}

ValueRef split(const std::vector<ValueRef>& args, const AttrMap& attrs, const SourceSpan& s) {
  const TensorLiteral& x = as_tensor(args[0], s, "split");
  int64_t axis = attr_int_or(attrs, "axis", 0);
  auto indices = attr_int_list(attrs, "indices", s);
  auto dims = x.shape.to_ints();
  int64_t axdim = dims[axis];

  int64_t outer = 1, inner = 1;
  for (int64_t i = 0; i < axis; ++i) outer *= dims[i];
  for (size_t i = axis + 1; i < dims.size(); ++i) inner *= dims[i];

  std::vector<ValueRef> parts;
  int64_t prev = 0;
  auto emit = [&](int64_t lo, int64_t hi) {
    if (lo > hi || hi > axdim) diag_throw(DiagCode::TypeMismatch, "split: bad indices", s);
    auto part_dims = dims;
    part_dims[axis] = hi - lo;
    TensorLiteral part = TensorLiteral::zeros(Shape::of(part_dims), x.dtype);
    for (int64_t o = 0; o < outer; ++o) {
      for (int64_t a2 = lo; a2 < hi; ++a2) {
        for (int64_t in = 0; in < inner; ++in) {
          int64_t src = (o * axdim + a2) * inner + in;
          int64_t dst = (o * (hi - lo) + (a2 - lo)) * inner + in;
          if (x.dtype.is_float() && x.dtype.bits == 32) {
            part.f32s()[dst] = x.f32s()[src];
          } else if (x.dtype.is_float()) {
            part.f64s()[dst] = x.f64s()[src];
          } else {
            part.ints()[dst] = x.ints()[src];
          }
        }
      }
    }
    parts.push_back(make_tensor_value(std::move(part)));
  };
  for (int64_t ix : indices) {
    emit(prev, ix);
    prev = ix;
  }
  emit(prev, axdim);
  return make_tuple_value(std::move(parts));
}

}  // namespace microrelay::kernels
