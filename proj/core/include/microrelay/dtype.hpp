// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "microrelay/diagnostics.hpp"

namespace microrelay {

enum class TypeCode : uint8_t { Int, UInt, Float, Bool };

/// Element type of a tensor: a type code plus bit width and vector lane
/// count. Lanes are carried for completeness; reference kernels require
/// lanes == 1.
struct BaseType {
  TypeCode code = TypeCode::Float;
  int bits = 32;
  int lanes = 1;

  bool operator==(const BaseType& o) const {
    return code == o.code && bits == o.bits && lanes == o.lanes;
  }
  bool operator!=(const BaseType& o) const { return !(*this == o); }

  bool is_float() const { return code == TypeCode::Float; }
  bool is_int() const { return code == TypeCode::Int || code == TypeCode::UInt; }
  bool is_bool() const { return code == TypeCode::Bool; }
  bool is_signed() const { return code == TypeCode::Int || code == TypeCode::Float; }

  std::string str() const;

  static BaseType f32() { return {TypeCode::Float, 32, 1}; }
  static BaseType f64() { return {TypeCode::Float, 64, 1}; }
  static BaseType i8() { return {TypeCode::Int, 8, 1}; }
  static BaseType i16() { return {TypeCode::Int, 16, 1}; }
  static BaseType i32() { return {TypeCode::Int, 32, 1}; }
  static BaseType i64() { return {TypeCode::Int, 64, 1}; }
  static BaseType u8() { return {TypeCode::UInt, 8, 1}; }
  static BaseType boolean() { return {TypeCode::Bool, 1, 1}; }
};

/// Validates the BaseType invariants (bit widths, lanes, bool width).
void validate_base_type(const BaseType& bt, const SourceSpan& span = SourceSpan::unknown());

/// Parses names like "float32", "int8", "uint8x4", "bool". Returns false if
/// the name is not a base type.
bool try_parse_base_type(const std::string& name, BaseType* out);

}  // namespace microrelay
