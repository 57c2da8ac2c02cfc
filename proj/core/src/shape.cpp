// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#include "microrelay/shape.hpp"

#include <sstream>

#include "microrelay/diagnostics.hpp"

namespace microrelay {

std::string Dim::str() const {
  switch (kind) {
    case Kind::Const: return std::to_string(value);
    case Kind::Var: return "?" + name;
    case Kind::Any: return "Any";
  }
  return "?";
}

std::vector<int64_t> Shape::to_ints() const {
  std::vector<int64_t> out;
  out.reserve(dims.size());
  for (const auto& d : dims) {
    MREL_CHECK(d.is_const(), "to_ints on non-concrete shape");
    out.push_back(d.value);
  }
  return out;
}

std::string Shape::str() const {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < dims.size(); ++i) {
    if (i) os << ", ";
    os << dims[i].str();
  }
  os << ")";
  return os.str();
}

}  // namespace microrelay
