// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace microrelay {

/// One tensor dimension: a non-negative constant, a named symbolic variable,
/// or the dynamic wildcard Any. Dimension arithmetic beyond these three
/// forms is intentionally unsupported.
struct Dim {
  enum class Kind : uint8_t { Const, Var, Any };

  Kind kind = Kind::Const;
  int64_t value = 0;     // Const payload
  std::string name;      // Var payload

  static Dim constant(int64_t v) { return Dim{Kind::Const, v, {}}; }
  static Dim var(std::string n) { return Dim{Kind::Var, 0, std::move(n)}; }
  static Dim any() { return Dim{Kind::Any, 0, {}}; }

  bool is_const() const { return kind == Kind::Const; }
  bool is_var() const { return kind == Kind::Var; }
  bool is_any() const { return kind == Kind::Any; }

  bool operator==(const Dim& o) const {
    if (kind != o.kind) return false;
    if (kind == Kind::Const) return value == o.value;
    if (kind == Kind::Var) return name == o.name;
    return true;
  }
  bool operator!=(const Dim& o) const { return !(*this == o); }

  std::string str() const;
};

/// A tensor shape: an ordered list of dimensions. Empty shape = scalar.
struct Shape {
  std::vector<Dim> dims;

  Shape() = default;
  explicit Shape(std::vector<Dim> d) : dims(std::move(d)) {}

  static Shape scalar() { return Shape{}; }
  static Shape of(const std::vector<int64_t>& values) {
    Shape s;
    s.dims.reserve(values.size());
    for (int64_t v : values) s.dims.push_back(Dim::constant(v));
    return s;
  }

  size_t rank() const { return dims.size(); }
  bool is_scalar() const { return dims.empty(); }

  /// True iff every dimension is a Const.
  bool all_const() const {
    for (const auto& d : dims)
      if (!d.is_const()) return false;
    return true;
  }

  bool has_any() const {
    for (const auto& d : dims)
      if (d.is_any()) return true;
    return false;
  }

  /// Element count; nullopt when some dim is symbolic or Any.
  std::optional<int64_t> num_elements() const {
    int64_t n = 1;
    for (const auto& d : dims) {
      if (!d.is_const()) return std::nullopt;
      n *= d.value;
    }
    return n;
  }

  /// Concrete dims as plain integers. Requires all_const().
  std::vector<int64_t> to_ints() const;

  bool operator==(const Shape& o) const { return dims == o.dims; }
  bool operator!=(const Shape& o) const { return !(*this == o); }

  std::string str() const;
};

}  // namespace microrelay
