// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "microrelay/dtype.hpp"
#include "microrelay/shape.hpp"

namespace microrelay {

struct Type;
using TypeRef = std::shared_ptr<const Type>;

enum class TypeKind : uint8_t {
  Tensor,    // Tensor[shape, base-type]
  Tuple,     // (t1, ..., tn)
  Func,      // fn<vars>(args) -> ret where relations
  Ref,       // Ref[t]
  TypeVar,   // bound type variable (rigid within its scope)
  TypeCall,  // head[targs]  (ADT instantiation)
  TypeName,  // bare ADT name
  Hole,      // inference variable; never escapes a solved module
};

/// A named relation constraint on a function type, e.g. the `where` clause
/// of an operator signature. `args` index into the function's signature
/// types (arguments followed by result).
struct TypeRelationClause {
  std::string relation;
  std::vector<TypeRef> args;
};

struct Type {
  TypeKind kind;

  // Tensor
  Shape shape;
  BaseType dtype;

  // Tuple / TypeCall args
  std::vector<TypeRef> fields;

  // Func
  std::vector<std::string> type_params;
  std::vector<TypeRef> arg_types;
  TypeRef ret_type;
  std::vector<TypeRelationClause> relations;

  // TypeVar / TypeName / TypeCall head
  std::string name;

  // Hole
  int hole_id = -1;

  explicit Type(TypeKind k) : kind(k) {}

  bool is(TypeKind k) const { return kind == k; }
  std::string str() const;
};

TypeRef tensor_type(Shape shape, BaseType dtype);
TypeRef scalar_type(BaseType dtype);
TypeRef tuple_type(std::vector<TypeRef> fields);
TypeRef unit_type();  // the empty tuple
TypeRef func_type(std::vector<TypeRef> args, TypeRef ret,
                  std::vector<std::string> type_params = {},
                  std::vector<TypeRelationClause> relations = {});
TypeRef ref_type(TypeRef inner);
TypeRef type_var(std::string name);
TypeRef type_call(std::string head, std::vector<TypeRef> args);
TypeRef type_name(std::string name);
TypeRef type_hole(int id);

/// Structural equality on fully resolved types. Type variables and dim
/// variables compare by name; holes compare by id.
bool type_equal(const TypeRef& a, const TypeRef& b);

/// True when the type contains no holes and every tensor shape has only
/// Const or Any dims (no symbolic variables).
bool type_concrete(const TypeRef& t);

/// True when the type contains no holes (symbolic dims permitted).
bool type_resolved(const TypeRef& t);

std::string type_str(const TypeRef& t);

}  // namespace microrelay
