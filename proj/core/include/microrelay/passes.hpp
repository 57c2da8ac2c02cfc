// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "microrelay/module.hpp"
#include "microrelay/value.hpp"

namespace microrelay {

/// An ordered pipeline of named IR-to-IR transformations. Type inference
/// re-runs after every pass; the first failure aborts with the failing
/// pass named in the diagnostic.
struct PassContext {
  struct PassDesc {
    std::string name;
    AttrMap options;
  };
  std::vector<PassDesc> passes;
  AttrMap options;  // global options, e.g. {"fuse.max_depth": 8, "quant.bits": 8}
  /// Calibration inputs for the quantize pass: one argument list per
  /// calibration sample, applied to `entry`.
  std::vector<std::vector<ValueRef>> calibration_inputs;
  std::string entry = "main";

  /// Parses a CLI pass list like "fuse,fold,layout=NHWC". Unknown names
  /// throw Diagnostic(UnknownPass) listing the valid passes.
  static PassContext from_pass_list(const std::string& comma_separated);
};

ModuleEnv run_pipeline(const ModuleEnv& m, const PassContext& ctx);
std::vector<std::string> registered_pass_names();

// ---- general-purpose passes ---------------------------------------------

/// Replaces every pure operator call whose arguments are all constants with
/// its interpreter result. Folding only; no algebraic identities.
ModuleEnv constant_fold(const ModuleEnv& m);

/// Removes let-bindings whose variable is unused and whose value expression
/// is effect-free. Ref operations count as effects; so do calls to
/// anything that is not a registry operator.
ModuleEnv dead_code_elim(const ModuleEnv& m);

/// Merges alpha-equal pure bindings within the same scope (dominance-aware:
/// sibling branch arms do not share bindings). Normalizes to ANF first.
ModuleEnv common_subexpr_elim(const ModuleEnv& m);

/// True when the expression can be removed or merged without changing
/// observable behavior (the effect classification shared by DCE/CSE/PE).
bool is_effect_free(const ExprRef& e, const OpRegistry& registry);

// ---- accelerator-oriented rewrites ---------------------------------------

/// Moves constant scaling multiplications across conv2d onto the weights,
/// so that no scalar multiply remains on the data path (run constant_fold
/// afterwards to collapse the weight-side multiplies).
ModuleEnv fold_axis_scale(const ModuleEnv& m);

/// Fuses sibling conv2d calls that share one input and compatible geometry
/// into a single conv2d over concatenated weights followed by a split.
ModuleEnv combine_parallel_conv2d(const ModuleEnv& m);

/// Rewrites conv2d data layouts to the target ("NCHW" or "NHWC"), inserting
/// explicit transposes at the boundaries.
ModuleEnv alter_op_layout(const ModuleEnv& m, const std::string& target_layout);

}  // namespace microrelay
