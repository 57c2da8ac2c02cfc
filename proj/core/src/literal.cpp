// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#include "microrelay/literal.hpp"

#include <cstring>

namespace microrelay {

int64_t TensorLiteral::num_elements() const {
  if (auto* v = std::get_if<std::vector<int64_t>>(&data)) return static_cast<int64_t>(v->size());
  if (auto* v = std::get_if<std::vector<float>>(&data)) return static_cast<int64_t>(v->size());
  return static_cast<int64_t>(std::get<std::vector<double>>(data).size());
}

double TensorLiteral::get_double(int64_t i) const {
  if (auto* v = std::get_if<std::vector<int64_t>>(&data)) return static_cast<double>((*v)[i]);
  if (auto* v = std::get_if<std::vector<float>>(&data)) return static_cast<double>((*v)[i]);
  return std::get<std::vector<double>>(data)[i];
}

void TensorLiteral::set_double(int64_t i, double x) {
  if (auto* v = std::get_if<std::vector<int64_t>>(&data)) {
    (*v)[i] = static_cast<int64_t>(x);
  } else if (auto* v = std::get_if<std::vector<float>>(&data)) {
    (*v)[i] = static_cast<float>(x);
  } else {
    std::get<std::vector<double>>(data)[i] = x;
  }
}

int64_t TensorLiteral::get_int(int64_t i) const {
  if (auto* v = std::get_if<std::vector<int64_t>>(&data)) return (*v)[i];
  if (auto* v = std::get_if<std::vector<float>>(&data)) return static_cast<int64_t>((*v)[i]);
  return static_cast<int64_t>(std::get<std::vector<double>>(data)[i]);
}

void TensorLiteral::validate(const SourceSpan& span) const {
  validate_base_type(dtype, span);
  if (!shape.all_const())
    diag_throw(DiagCode::MalformedLiteral, "literal shape must be fully concrete", span);
  auto want = shape.num_elements();
  if (!want || *want != num_elements()) {
    diag_throw(DiagCode::MalformedLiteral,
               "literal has " + std::to_string(num_elements()) + " elements but shape " +
                   shape.str() + " needs " + std::to_string(want ? *want : -1),
               span);
  }
  const bool int_storage = uses_int_storage();
  if (dtype.is_float() && int_storage)
    diag_throw(DiagCode::MalformedLiteral, "float literal with integer storage", span);
  if (!dtype.is_float() && !int_storage)
    diag_throw(DiagCode::MalformedLiteral, "integer literal with float storage", span);
  if (dtype.is_float() && dtype.bits == 64 && !std::holds_alternative<std::vector<double>>(data))
    diag_throw(DiagCode::MalformedLiteral, "float64 literal must use double storage", span);
  if (dtype.is_float() && dtype.bits == 32 && !std::holds_alternative<std::vector<float>>(data))
    diag_throw(DiagCode::MalformedLiteral, "float32 literal must use float storage", span);
}

bool TensorLiteral::same_as(const TensorLiteral& o) const {
  if (dtype != o.dtype || !(shape == o.shape)) return false;
  if (data.index() != o.data.index()) return false;
  // Bitwise comparison so that e.g. -0.0 and 0.0 count as different.
  if (auto* v = std::get_if<std::vector<int64_t>>(&data)) return *v == o.ints();
  if (auto* v = std::get_if<std::vector<float>>(&data)) {
    const auto& w = o.f32s();
    if (v->size() != w.size()) return false;
    return std::memcmp(v->data(), w.data(), v->size() * sizeof(float)) == 0;
  }
  const auto& v = f64s();
  const auto& w = o.f64s();
  if (v.size() != w.size()) return false;
  return std::memcmp(v.data(), w.data(), v.size() * sizeof(double)) == 0;
}

TensorLiteral TensorLiteral::zeros(Shape shape, BaseType dtype) {
  TensorLiteral lit;
  lit.dtype = dtype;
  auto n = shape.num_elements();
  MREL_CHECK(n.has_value(), "zeros needs a concrete shape");
  lit.shape = std::move(shape);
  if (dtype.is_float() && dtype.bits == 64) {
    lit.data = std::vector<double>(static_cast<size_t>(*n), 0.0);
  } else if (dtype.is_float()) {
    lit.data = std::vector<float>(static_cast<size_t>(*n), 0.0f);
  } else {
    lit.data = std::vector<int64_t>(static_cast<size_t>(*n), 0);
  }
  return lit;
}

TensorLiteral TensorLiteral::scalar_i32(int64_t v) {
  TensorLiteral lit;
  lit.dtype = BaseType::i32();
  lit.shape = Shape::scalar();
  lit.data = std::vector<int64_t>{v};
  return lit;
}

TensorLiteral TensorLiteral::scalar_i64(int64_t v) {
  TensorLiteral lit = scalar_i32(v);
  lit.dtype = BaseType::i64();
  return lit;
}

TensorLiteral TensorLiteral::scalar_f32(float v) {
  TensorLiteral lit;
  lit.dtype = BaseType::f32();
  lit.shape = Shape::scalar();
  lit.data = std::vector<float>{v};
  return lit;
}

TensorLiteral TensorLiteral::scalar_bool(bool v) {
  TensorLiteral lit;
  lit.dtype = BaseType::boolean();
  lit.shape = Shape::scalar();
  lit.data = std::vector<int64_t>{v ? 1 : 0};
  return lit;
}

TensorLiteral TensorLiteral::from_f32(Shape shape, std::vector<float> values) {
  TensorLiteral lit;
  lit.dtype = BaseType::f32();
  lit.shape = std::move(shape);
  lit.data = std::move(values);
  lit.validate();
  return lit;
}

TensorLiteral TensorLiteral::from_i32(Shape shape, std::vector<int64_t> values) {
  TensorLiteral lit;
  lit.dtype = BaseType::i32();
  lit.shape = std::move(shape);
  lit.data = std::move(values);
  lit.validate();
  return lit;
}

}  // namespace microrelay
