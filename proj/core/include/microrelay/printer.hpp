// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "microrelay/module.hpp"
#include "microrelay/value.hpp"

namespace microrelay {

/// Pretty-prints a module in the text format. Deterministic; the output
/// re-parses to a module alpha-equal to the input. Constants larger than
/// the inline threshold are emitted into the metadata constant pool.
std::string print_module(const ModuleEnv& m);

std::string print_expr(const ExprRef& e);
std::string print_type(const TypeRef& t);

/// Renders a runtime value in text-literal syntax (tensors as nested
/// lists, tuples in parens, ADT values as constructor applications).
std::string print_value(const ValueRef& v);

}  // namespace microrelay
