// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#include "microrelay/module.hpp"

#include "microrelay/registry.hpp"

namespace microrelay {

ModuleEnv::ModuleEnv() : registry(builtin_registry()) {}

ModuleEnv::ModuleEnv(std::shared_ptr<const OpRegistry> reg) : registry(std::move(reg)) {
  if (!registry) registry = builtin_registry();
}

ExprRef ModuleEnv::global(const std::string& name) const {
  auto it = globals.find(name);
  if (it == globals.end()) diag_throw(DiagCode::UnknownGlobal, "no global @" + name);
  return it->second;
}

void ModuleEnv::set_global(const std::string& name, ExprRef fn) {
  MREL_CHECK(fn && fn->kind == ExprKind::Function, "global @" + name + " must be a function");
  globals[name] = std::move(fn);
}

const AdtDef* ModuleEnv::find_adt(const std::string& name) const {
  auto it = adts.find(name);
  return it == adts.end() ? nullptr : &it->second;
}

const AdtConstructor* ModuleEnv::find_constructor(const std::string& ctor,
                                                  const AdtDef** owner) const {
  for (const auto& [name, def] : adts) {
    if (const auto* c = def.find_constructor(ctor)) {
      if (owner) *owner = &def;
      return c;
    }
  }
  return nullptr;
}

}  // namespace microrelay
