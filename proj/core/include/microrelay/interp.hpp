// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "microrelay/module.hpp"
#include "microrelay/registry.hpp"
#include "microrelay/value.hpp"

namespace microrelay {

struct InterpOptions {
  /// Evaluation step budget; OutOfFuel once exhausted.
  int64_t fuel = 10'000'000;
  /// Call-depth guard (reported as OutOfFuel as well).
  int max_call_depth = 4000;
  /// When set, called at every simulated_quantize site with the incoming
  /// tensor and the call attributes. Used by quantization calibration.
  std::function<void(const TensorLiteral& input, const AttrMap& attrs)> simq_observer;
};

/// Reference tree-walking interpreter: call-by-value, left-to-right.
/// Each instance owns its own store; instances are independent.
class Interpreter {
 public:
  explicit Interpreter(const ModuleEnv& m, InterpOptions opts = {});

  /// Calls a global with the given arguments.
  ValueRef run(const std::string& entry, const std::vector<ValueRef>& args);

  /// Evaluates a closed expression in the module context.
  ValueRef eval(const ExprRef& e);

 private:
  struct State;
  ValueRef eval_in(const ExprRef& e, EnvRef env, State& st);
  ValueRef apply(const ValueRef& callee, const std::vector<ValueRef>& args, const AttrMap& attrs,
                 EnvRef env, State& st, const SourceSpan& span);
  bool match_pattern(const PatternRef& pat, const ValueRef& v, EnvRef* env, State& st);

  const ModuleEnv& module_;
  InterpOptions opts_;
};

/// One-shot convenience wrapper; makes a fresh interpreter (fresh store).
ValueRef interp(const ModuleEnv& m, const std::string& entry, const std::vector<ValueRef>& args,
                InterpOptions opts = {});

/// Runs one operator's reference kernel directly.
ValueRef eval_kernel(const OperatorDecl& op, const std::vector<ValueRef>& args,
                     const AttrMap& attrs = {}, const SourceSpan& span = {});

}  // namespace microrelay
