// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "microrelay/module.hpp"

namespace microrelay {

/// Text-format source of the standard library: List/Option/Tree ADTs and
/// the map/foldl/foldr/length/nth/sum_list combinators.
const std::string& prelude_source();

/// Adds the prelude ADTs and functions to the module. Loading twice is a
/// no-op; a user definition that shadows a prelude name raises
/// Diagnostic(NameCollision).
ModuleEnv load_prelude(const ModuleEnv& m);

}  // namespace microrelay
