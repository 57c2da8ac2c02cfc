// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#include "microrelay/type.hpp"

#include <sstream>

namespace microrelay {

TypeRef tensor_type(Shape shape, BaseType dtype) {
  auto t = std::make_shared<Type>(TypeKind::Tensor);
  t->shape = std::move(shape);
  t->dtype = dtype;
  return t;
}

TypeRef scalar_type(BaseType dtype) { return tensor_type(Shape::scalar(), dtype); }

TypeRef tuple_type(std::vector<TypeRef> fields) {
  auto t = std::make_shared<Type>(TypeKind::Tuple);
  t->fields = std::move(fields);
  return t;
}

TypeRef unit_type() { return tuple_type({}); }

TypeRef func_type(std::vector<TypeRef> args, TypeRef ret, std::vector<std::string> type_params,
                  std::vector<TypeRelationClause> relations) {
  auto t = std::make_shared<Type>(TypeKind::Func);
  t->arg_types = std::move(args);
  t->ret_type = std::move(ret);
  t->type_params = std::move(type_params);
  t->relations = std::move(relations);
  return t;
}

TypeRef ref_type(TypeRef inner) {
  auto t = std::make_shared<Type>(TypeKind::Ref);
  t->fields = {std::move(inner)};
  return t;
}

TypeRef type_var(std::string name) {
  auto t = std::make_shared<Type>(TypeKind::TypeVar);
  t->name = std::move(name);
  return t;
}

TypeRef type_call(std::string head, std::vector<TypeRef> args) {
  auto t = std::make_shared<Type>(TypeKind::TypeCall);
  t->name = std::move(head);
  t->fields = std::move(args);
  return t;
}

TypeRef type_name(std::string name) {
  auto t = std::make_shared<Type>(TypeKind::TypeName);
  t->name = std::move(name);
  return t;
}

TypeRef type_hole(int id) {
  auto t = std::make_shared<Type>(TypeKind::Hole);
  t->hole_id = id;
  return t;
}

bool type_equal(const TypeRef& a, const TypeRef& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TypeKind::Tensor:
      return a->shape == b->shape && a->dtype == b->dtype;
    case TypeKind::Tuple:
    case TypeKind::TypeCall: {
      if (a->name != b->name || a->fields.size() != b->fields.size()) return false;
      for (size_t i = 0; i < a->fields.size(); ++i)
        if (!type_equal(a->fields[i], b->fields[i])) return false;
      return true;
    }
    case TypeKind::Func: {
      if (a->type_params != b->type_params) return false;
      if (a->arg_types.size() != b->arg_types.size()) return false;
      for (size_t i = 0; i < a->arg_types.size(); ++i)
        if (!type_equal(a->arg_types[i], b->arg_types[i])) return false;
      if (!type_equal(a->ret_type, b->ret_type)) return false;
      if (a->relations.size() != b->relations.size()) return false;
      for (size_t i = 0; i < a->relations.size(); ++i) {
        if (a->relations[i].relation != b->relations[i].relation) return false;
        if (a->relations[i].args.size() != b->relations[i].args.size()) return false;
        for (size_t j = 0; j < a->relations[i].args.size(); ++j)
          if (!type_equal(a->relations[i].args[j], b->relations[i].args[j])) return false;
      }
      return true;
    }
    case TypeKind::Ref:
      return type_equal(a->fields[0], b->fields[0]);
    case TypeKind::TypeVar:
    case TypeKind::TypeName:
      return a->name == b->name;
    case TypeKind::Hole:
      return a->hole_id == b->hole_id;
  }
  return false;
}

namespace {

template <typename Pred>
bool type_all_of(const TypeRef& t, Pred&& pred) {
  if (!t) return true;
  if (!pred(t)) return false;
  for (const auto& f : t->fields)
    if (!type_all_of(f, pred)) return false;
  for (const auto& a : t->arg_types)
    if (!type_all_of(a, pred)) return false;
  if (t->ret_type && !type_all_of(t->ret_type, pred)) return false;
  for (const auto& rel : t->relations)
    for (const auto& a : rel.args)
      if (!type_all_of(a, pred)) return false;
  return true;
}

}  // namespace

bool type_concrete(const TypeRef& t) {
  return type_all_of(t, [](const TypeRef& n) {
    if (n->kind == TypeKind::Hole) return false;
    if (n->kind == TypeKind::Tensor) {
      for (const auto& d : n->shape.dims)
        if (d.is_var()) return false;
    }
    return true;
  });
}

bool type_resolved(const TypeRef& t) {
  return type_all_of(t, [](const TypeRef& n) { return n->kind != TypeKind::Hole; });
}

std::string Type::str() const {
  std::ostringstream os;
  switch (kind) {
    case TypeKind::Tensor:
      if (shape.is_scalar()) {
        os << "Tensor[(), " << dtype.str() << "]";
      } else {
        os << "Tensor[" << shape.str() << ", " << dtype.str() << "]";
      }
      break;
    case TypeKind::Tuple: {
      os << "(";
      for (size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ", ";
        os << fields[i]->str();
      }
      if (fields.size() == 1) os << ",";
      os << ")";
      break;
    }
    case TypeKind::Func: {
      os << "fn";
      if (!type_params.empty()) {
        os << "<";
        for (size_t i = 0; i < type_params.size(); ++i) {
          if (i) os << ", ";
          os << type_params[i];
        }
        os << ">";
      }
      os << "(";
      for (size_t i = 0; i < arg_types.size(); ++i) {
        if (i) os << ", ";
        os << arg_types[i]->str();
      }
      os << ") -> " << (ret_type ? ret_type->str() : "?");
      if (!relations.empty()) {
        os << " where ";
        for (size_t i = 0; i < relations.size(); ++i) {
          if (i) os << ", ";
          os << relations[i].relation << "(";
          for (size_t j = 0; j < relations[i].args.size(); ++j) {
            if (j) os << ", ";
            os << relations[i].args[j]->str();
          }
          os << ")";
        }
      }
      break;
    }
    case TypeKind::Ref:
      os << "Ref[" << fields[0]->str() << "]";
      break;
    case TypeKind::TypeVar:
      os << name;
      break;
    case TypeKind::TypeCall: {
      os << name << "[";
      for (size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ", ";
        os << fields[i]->str();
      }
      os << "]";
      break;
    }
    case TypeKind::TypeName:
      os << name;
      break;
    case TypeKind::Hole:
      os << "_" << hole_id;
      break;
  }
  return os.str();
}

std::string type_str(const TypeRef& t) { return t ? t->str() : "<null>"; }

}  // namespace microrelay
