// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#include "microrelay/value.hpp"

#include <sstream>

namespace microrelay {

EnvRef env_bind(EnvRef env, std::string name, ValueRef value) {
  auto node = std::make_shared<EnvNode>();
  node->name = std::move(name);
  node->value = std::move(value);
  node->next = std::move(env);
  return node;
}

const ValueRef* env_lookup(const EnvRef& env, const std::string& name) {
  for (const EnvNode* n = env.get(); n; n = n->next.get()) {
    if (n->name == name) return &n->value;
  }
  return nullptr;
}

namespace {
std::shared_ptr<Value> val(ValueKind k) { return std::make_shared<Value>(k); }
}  // namespace

ValueRef make_tensor_value(TensorLiteral lit) {
  auto v = val(ValueKind::Tensor);
  v->tensor = std::move(lit);
  return v;
}

ValueRef make_tuple_value(std::vector<ValueRef> fields) {
  auto v = val(ValueKind::Tuple);
  v->fields = std::move(fields);
  return v;
}

ValueRef make_closure(EnvRef env, ExprRef fn) {
  auto v = val(ValueKind::Closure);
  v->env = std::move(env);
  v->fn = std::move(fn);
  return v;
}

ValueRef make_op_closure(std::string op_name) {
  auto v = val(ValueKind::OpClosure);
  v->name = std::move(op_name);
  return v;
}

ValueRef make_ctor_closure(std::string ctor_name) {
  auto v = val(ValueKind::CtorClosure);
  v->name = std::move(ctor_name);
  return v;
}

ValueRef make_adt_value(std::string ctor_name, std::vector<ValueRef> fields) {
  auto v = val(ValueKind::Adt);
  v->name = std::move(ctor_name);
  v->fields = std::move(fields);
  return v;
}

ValueRef make_ref_cell(int64_t cell_id) {
  auto v = val(ValueKind::RefCell);
  v->cell_id = cell_id;
  return v;
}

bool value_equal(const ValueRef& a, const ValueRef& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case ValueKind::Tensor:
      return a->tensor.same_as(b->tensor);
    case ValueKind::Tuple:
    case ValueKind::Adt: {
      if (a->name != b->name || a->fields.size() != b->fields.size()) return false;
      for (size_t i = 0; i < a->fields.size(); ++i)
        if (!value_equal(a->fields[i], b->fields[i])) return false;
      return true;
    }
    case ValueKind::OpClosure:
    case ValueKind::CtorClosure:
      return a->name == b->name;
    case ValueKind::Closure:
      return a->fn == b->fn && a->env == b->env;
    case ValueKind::RefCell:
      return a->cell_id == b->cell_id;
  }
  return false;
}

TypeRef value_type(const ValueRef& v) {
  if (!v) return nullptr;
  switch (v->kind) {
    case ValueKind::Tensor:
      return v->tensor.type();
    case ValueKind::Tuple: {
      std::vector<TypeRef> fields;
      for (const auto& f : v->fields) fields.push_back(value_type(f));
      return tuple_type(std::move(fields));
    }
    case ValueKind::Closure:
      return v->fn ? v->fn->checked_type : nullptr;
    default:
      return nullptr;
  }
}

std::string Value::str() const {
  std::ostringstream os;
  switch (kind) {
    case ValueKind::Tensor:
      os << "<tensor " << tensor.shape.str() << " " << tensor.dtype.str() << ">";
      break;
    case ValueKind::Tuple:
      os << "<tuple/" << fields.size() << ">";
      break;
    case ValueKind::Closure:
      os << "<closure>";
      break;
    case ValueKind::OpClosure:
      os << "<op " << name << ">";
      break;
    case ValueKind::CtorClosure:
      os << "<constructor " << name << ">";
      break;
    case ValueKind::Adt:
      os << name << "/" << fields.size();
      break;
    case ValueKind::RefCell:
      os << "<ref #" << cell_id << ">";
      break;
  }
  return os.str();
}

}  // namespace microrelay
