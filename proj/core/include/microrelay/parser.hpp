// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <string>

#include "microrelay/module.hpp"
#include "microrelay/registry.hpp"

namespace microrelay {

/// Parses a module in the text format. `file` is used for spans only.
/// The result is well-formed (check_well_formed has run). meta[Constant][n]
/// references are resolved against the file's metadata constant pool.
ModuleEnv parse_module(const std::string& text, const std::string& file = "<input>",
                       std::shared_ptr<const OpRegistry> registry = nullptr);

/// Like parse_module, but definitions from `base` (e.g. the prelude) are in
/// scope and included in the result.
ModuleEnv parse_module_with_base(const std::string& text, const std::string& file,
                                 const ModuleEnv& base);

/// Parses a single expression (no definitions). Free variables allowed.
ExprRef parse_expr(const std::string& text, const std::string& file = "<expr>",
                   std::shared_ptr<const OpRegistry> registry = nullptr);

/// Parses an input-values sidecar file: one `%name = const(...)` binding
/// per line. Used by the CLI `run` subcommand.
std::map<std::string, TensorLiteral> parse_input_bindings(const std::string& text,
                                                          const std::string& file = "<inputs>");

}  // namespace microrelay
