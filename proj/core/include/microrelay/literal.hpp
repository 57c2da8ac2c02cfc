// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "microrelay/diagnostics.hpp"
#include "microrelay/dtype.hpp"
#include "microrelay/shape.hpp"
#include "microrelay/type.hpp"

namespace microrelay {

/// A dense constant tensor. Storage is row-major and dtype-faithful:
/// float32 data lives in a float buffer (so arithmetic rounds like f32),
/// float64 in double, and every integer/bool dtype in int64 (narrowing is
/// applied by kernels on write).
struct TensorLiteral {
  BaseType dtype;
  Shape shape;  // all dims Const
  std::variant<std::vector<int64_t>, std::vector<float>, std::vector<double>> data;

  TensorLiteral() : dtype(BaseType::f32()), data(std::vector<float>{}) {}

  int64_t num_elements() const;
  bool uses_int_storage() const { return std::holds_alternative<std::vector<int64_t>>(data); }

  const std::vector<int64_t>& ints() const { return std::get<std::vector<int64_t>>(data); }
  std::vector<int64_t>& ints() { return std::get<std::vector<int64_t>>(data); }
  const std::vector<float>& f32s() const { return std::get<std::vector<float>>(data); }
  std::vector<float>& f32s() { return std::get<std::vector<float>>(data); }
  const std::vector<double>& f64s() const { return std::get<std::vector<double>>(data); }
  std::vector<double>& f64s() { return std::get<std::vector<double>>(data); }

  /// Element read/write through double. Exact for every value the suite
  /// uses; prefer the typed buffers in kernels that must be bit-faithful.
  double get_double(int64_t index) const;
  void set_double(int64_t index, double v);
  int64_t get_int(int64_t index) const;

  TypeRef type() const { return tensor_type(shape, dtype); }

  /// Checks the data-length invariant and dtype validity.
  void validate(const SourceSpan& span = SourceSpan::unknown()) const;

  bool same_as(const TensorLiteral& o) const;  // dtype, shape, and bitwise data

  static TensorLiteral zeros(Shape shape, BaseType dtype);
  static TensorLiteral scalar_i32(int64_t v);
  static TensorLiteral scalar_i64(int64_t v);
  static TensorLiteral scalar_f32(float v);
  static TensorLiteral scalar_bool(bool v);
  static TensorLiteral from_f32(Shape shape, std::vector<float> values);
  static TensorLiteral from_i32(Shape shape, std::vector<int64_t> values);
};

}  // namespace microrelay
