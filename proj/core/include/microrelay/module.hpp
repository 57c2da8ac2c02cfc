// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "microrelay/expr.hpp"

namespace microrelay {

class OpRegistry;

/// One constructor of an algebraic data type.
struct AdtConstructor {
  std::string name;
  std::vector<TypeRef> field_types;
};

/// Declaration of an algebraic data type, e.g. List[a] = Nil | Cons(a, List[a]).
struct AdtDef {
  std::string name;
  std::vector<std::string> type_params;
  std::vector<AdtConstructor> constructors;

  const AdtConstructor* find_constructor(const std::string& ctor) const {
    for (const auto& c : constructors)
      if (c.name == ctor) return &c;
    return nullptr;
  }
};

/// The compilation unit: named global functions plus ADT declarations.
/// Globals may be mutually recursive. The attached operator registry is
/// consulted by parsing, checking, interpretation, and the passes.
struct ModuleEnv {
  std::map<std::string, ExprRef> globals;  // name -> Function expr
  std::map<std::string, AdtDef> adts;
  std::shared_ptr<const OpRegistry> registry;

  ModuleEnv();
  explicit ModuleEnv(std::shared_ptr<const OpRegistry> reg);

  bool has_global(const std::string& name) const { return globals.count(name) > 0; }
  ExprRef global(const std::string& name) const;
  void set_global(const std::string& name, ExprRef fn);

  const AdtDef* find_adt(const std::string& name) const;
  /// Looks up a constructor across all ADTs; returns the owning def too.
  const AdtConstructor* find_constructor(const std::string& ctor, const AdtDef** owner = nullptr) const;
};

}  // namespace microrelay
