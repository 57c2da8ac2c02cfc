// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "microrelay/expr.hpp"
#include "microrelay/literal.hpp"

namespace microrelay {

struct Value;
using ValueRef = std::shared_ptr<const Value>;

/// Persistent environment used by closures: an immutable cons list of
/// bindings. Lookup is linear, which is fine at interpreter scale.
struct EnvNode {
  std::string name;
  ValueRef value;
  std::shared_ptr<const EnvNode> next;
};
using EnvRef = std::shared_ptr<const EnvNode>;

EnvRef env_bind(EnvRef env, std::string name, ValueRef value);
const ValueRef* env_lookup(const EnvRef& env, const std::string& name);

enum class ValueKind : uint8_t {
  Tensor,
  Tuple,
  Closure,      // user function + captured environment
  OpClosure,    // operator used as a first-class value
  CtorClosure,  // constructor used as a first-class value
  Adt,
  RefCell,
};

/// Interpreter runtime value.
struct Value {
  ValueKind kind;

  TensorLiteral tensor;            // Tensor
  std::vector<ValueRef> fields;    // Tuple elements / Adt fields
  EnvRef env;                      // Closure capture
  ExprRef fn;                      // Closure function
  std::string name;                // OpClosure op / CtorClosure or Adt constructor
  int64_t cell_id = -1;            // RefCell

  explicit Value(ValueKind k) : kind(k) {}
  bool is(ValueKind k) const { return kind == k; }
  std::string str() const;
};

ValueRef make_tensor_value(TensorLiteral lit);
ValueRef make_tuple_value(std::vector<ValueRef> fields);
ValueRef make_closure(EnvRef env, ExprRef fn);
ValueRef make_op_closure(std::string op_name);
ValueRef make_ctor_closure(std::string ctor_name);
ValueRef make_adt_value(std::string ctor_name, std::vector<ValueRef> fields);
ValueRef make_ref_cell(int64_t cell_id);

/// Structural equality; tensors compare bitwise.
bool value_equal(const ValueRef& a, const ValueRef& b);

/// The runtime type of a value (closures yield their function type if
/// annotated, else null). Used by type-soundness checks.
TypeRef value_type(const ValueRef& v);

}  // namespace microrelay
