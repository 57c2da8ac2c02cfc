// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "microrelay/module.hpp"
#include "microrelay/value.hpp"

namespace microrelay {

/// Quantization scheme parameters. sign = 1 selects the signed clip range
/// [-2^(bits-1), 2^(bits-1)-1]; sign = 0 the unsigned [0, 2^bits - 1].
struct QuantConfig {
  int64_t bits = 8;
  int64_t sign = 1;
  BaseType qtype = BaseType::i8();    // storage type after realize
  BaseType accum = BaseType::i32();   // accumulation type after realize
};

/// Per-operator annotation rules.
struct QuantRules {
  enum class Rule { QuantizeInputs, PassThrough };
  std::map<std::string, Rule> per_op;
  bool has_default = true;
  Rule default_rule = Rule::PassThrough;

  /// conv2d and dense inputs/weights annotated; everything else passes
  /// through.
  static QuantRules defaults();
  Rule lookup(const std::string& op, const SourceSpan& span) const;
};

/// Inserts simulated_quantize around the inputs designated by the rules.
/// The inserted sites carry bits/sign but no scale yet.
ModuleEnv quant_annotate(const ModuleEnv& m, const QuantRules& rules = QuantRules::defaults(),
                         const QuantConfig& cfg = {});

/// Sweeps a single global power-of-two scale over [2^-16, 2^16] and writes
/// the smallest scale that produces no overflow at any simulated_quantize
/// site on any calibration input. Throws Diagnostic(CalibrationFailed) if
/// none qualifies.
ModuleEnv quant_calibrate(const ModuleEnv& m,
                          const std::vector<std::vector<ValueRef>>& calibration_inputs,
                          const std::string& entry = "main");

/// Replaces every calibrated simulated_quantize with explicit
/// multiply/round/clip/cast arithmetic in the storage type, casts operands
/// of quantized ops to the accumulation type, and inserts the compensating
/// rescale on their outputs. Throws Diagnostic(Uncalibrated) if a site has
/// no scale.
ModuleEnv quant_realize(const ModuleEnv& m, const QuantConfig& cfg = {});

/// The scalar simulated-quantization function itself, exposed for tests:
/// clip(round(x / scale * 2^(bits-sign))) * scale / 2^(bits-sign),
/// computed in float32.
float simq_scalar(float x, int64_t bits, int64_t sign, float scale);

/// The realized quantization: the integer code cast to the storage type.
int64_t quantize_scalar(float x, int64_t bits, int64_t sign, float scale);

}  // namespace microrelay
