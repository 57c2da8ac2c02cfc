// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "microrelay/diagnostics.hpp"
#include "microrelay/infer.hpp"
#include "microrelay/interp.hpp"
#include "microrelay/parser.hpp"
#include "microrelay/printer.hpp"

namespace testutil {

using namespace microrelay;

inline ModuleEnv typed(const std::string& src, const std::string& file = "<test>") {
  return infer(parse_module(src, file));
}

inline ValueRef run_main(const ModuleEnv& m, const std::vector<ValueRef>& args = {},
                         InterpOptions opts = {}) {
  return interp(m, "main", args, opts);
}

inline ValueRef f32_tensor(const std::vector<int64_t>& dims, std::vector<float> data) {
  return make_tensor_value(TensorLiteral::from_f32(Shape::of(dims), std::move(data)));
}

inline ValueRef i32_scalar(int64_t v) { return make_tensor_value(TensorLiteral::scalar_i32(v)); }

/// Recursive comparison; integer/bool tensors bitwise, float tensors within
/// a relative tolerance (rel_tol = 0 means bitwise for floats too).
inline bool values_close(const ValueRef& a, const ValueRef& b, double rel_tol) {
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case ValueKind::Tensor: {
      const auto& ta = a->tensor;
      const auto& tb = b->tensor;
      if (ta.dtype != tb.dtype || !(ta.shape == tb.shape)) return false;
      if (!ta.dtype.is_float() || rel_tol == 0.0) return ta.same_as(tb);
      int64_t n = ta.num_elements();
      for (int64_t i = 0; i < n; ++i) {
        double x = ta.get_double(i), y = tb.get_double(i);
        if (x == y) continue;
        double denom = std::max(std::abs(x), std::abs(y));
        if (std::abs(x - y) > rel_tol * denom) return false;
      }
      return true;
    }
    case ValueKind::Tuple:
    case ValueKind::Adt: {
      if (a->name != b->name || a->fields.size() != b->fields.size()) return false;
      for (size_t i = 0; i < a->fields.size(); ++i)
        if (!values_close(a->fields[i], b->fields[i], rel_tol)) return false;
      return true;
    }
    default:
      return value_equal(a, b);
  }
}

/// Random concrete inputs for a typed entry function (tensor params only).
/// Returns empty optional-equivalent (empty vector with ok=false semantics)
/// when some parameter is not a concrete tensor.
inline bool random_inputs_for(const ModuleEnv& m, const std::string& entry, std::mt19937& rng,
                              std::vector<ValueRef>* out) {
  ExprRef fn = m.global(entry);
  const TypeRef& t = fn->checked_type;
  if (!t || t->kind != TypeKind::Func) return false;
  out->clear();
  for (const auto& at : t->arg_types) {
    if (!at || at->kind != TypeKind::Tensor || !at->shape.all_const()) return false;
    auto dims = at->shape.to_ints();
    int64_t n = 1;
    for (int64_t d : dims) n *= d;
    TensorLiteral lit = TensorLiteral::zeros(Shape::of(dims), at->dtype);
    if (at->dtype.is_float()) {
      std::uniform_real_distribution<float> dist(0.1f, 1.0f);
      for (int64_t i = 0; i < n; ++i) lit.set_double(i, dist(rng));
    } else if (at->dtype.is_bool()) {
      for (int64_t i = 0; i < n; ++i) lit.ints()[i] = std::uniform_int_distribution<int>(0, 1)(rng);
    } else {
      for (int64_t i = 0; i < n; ++i)
        lit.ints()[i] = std::uniform_int_distribution<int>(0, 4)(rng);
    }
    out->push_back(make_tensor_value(std::move(lit)));
  }
  return true;
}

/// Runs fn and reports the diagnostic code it throws (Internal if none).
inline DiagCode diag_code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Diagnostic& d) {
    return d.code();
  }
  return DiagCode::Internal;
}

}  // namespace testutil
