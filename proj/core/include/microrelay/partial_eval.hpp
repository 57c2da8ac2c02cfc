// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "microrelay/module.hpp"

namespace microrelay {

struct PeOptions {
  /// Reduction step budget; exceeding it raises Diagnostic(FuelExhausted).
  int64_t fuel = 10'000;
  /// How many times one global may be entered with partially static
  /// arguments on a single evaluation path before the call is residualized
  /// instead of unrolled further. Fully static calls are not limited by
  /// this (only by fuel).
  int max_unroll_depth = 64;
};

/// Online partial evaluator: an interpreter over partially static values
/// with a simulated store. Static subcomputations are evaluated away;
/// dynamic ones are residualized in A-normal form with effect order
/// preserved. Known-bound recursion unrolls.
ModuleEnv partial_eval(const ModuleEnv& m, const PeOptions& opts = {});

}  // namespace microrelay
