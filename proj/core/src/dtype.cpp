// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#include "microrelay/dtype.hpp"

#include <cctype>
#include <cstdlib>

namespace microrelay {

std::string BaseType::str() const {
  std::string base;
  switch (code) {
    case TypeCode::Int: base = "int"; break;
    case TypeCode::UInt: base = "uint"; break;
    case TypeCode::Float: base = "float"; break;
    case TypeCode::Bool: base = "bool"; break;
  }
  std::string s = base;
  if (code != TypeCode::Bool) s += std::to_string(bits);
  if (lanes != 1) s += "x" + std::to_string(lanes);
  return s;
}

void validate_base_type(const BaseType& bt, const SourceSpan& span) {
  const bool bits_ok =
      bt.bits == 1 || bt.bits == 8 || bt.bits == 16 || bt.bits == 32 || bt.bits == 64;
  if (!bits_ok) diag_throw(DiagCode::MalformedLiteral, "unsupported bit width " + bt.str(), span);
  if (bt.lanes < 1) diag_throw(DiagCode::MalformedLiteral, "lanes must be >= 1", span);
  if (bt.code == TypeCode::Bool && bt.bits != 1)
    diag_throw(DiagCode::MalformedLiteral, "bool must have bits = 1", span);
  if (bt.code == TypeCode::Float && (bt.bits != 16 && bt.bits != 32 && bt.bits != 64))
    diag_throw(DiagCode::MalformedLiteral, "unsupported float width " + bt.str(), span);
}

bool try_parse_base_type(const std::string& name, BaseType* out) {
  std::string base = name;
  int lanes = 1;
  auto xpos = name.find('x');
  if (xpos != std::string::npos && xpos + 1 < name.size() &&
      std::isdigit(static_cast<unsigned char>(name[xpos + 1]))) {
    base = name.substr(0, xpos);
    lanes = std::atoi(name.c_str() + xpos + 1);
    if (lanes < 1) return false;
  }
  auto starts = [&](const char* p) { return base.rfind(p, 0) == 0; };
  TypeCode code;
  std::string digits;
  if (base == "bool") {
    *out = BaseType{TypeCode::Bool, 1, lanes};
    return true;
  } else if (starts("uint")) {
    code = TypeCode::UInt;
    digits = base.substr(4);
  } else if (starts("int")) {
    code = TypeCode::Int;
    digits = base.substr(3);
  } else if (starts("float")) {
    code = TypeCode::Float;
    digits = base.substr(5);
  } else {
    return false;
  }
  if (digits.empty()) return false;
  for (char c : digits)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  int bits = std::atoi(digits.c_str());
  if (bits != 8 && bits != 16 && bits != 32 && bits != 64) return false;
  if (code == TypeCode::Float && bits == 8) return false;
  *out = BaseType{code, bits, lanes};
  return true;
}

}  // namespace microrelay
