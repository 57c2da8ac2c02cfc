// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Random, constructively well-typed program generators used by the
// property and acceptance suites. Expected shapes are tracked with the
// independent oracle, never with the compiler.

#pragma once

#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"

namespace testgen {

struct GenProgram {
  std::string text;  // a module with a single @main over float32 tensors
  std::vector<std::string> param_names;
  std::vector<oracle::Dims> param_shapes;
  oracle::Dims result_shape;  // oracle-computed shape of @main's result
  int op_count = 0;
};

/// A straight-line tensor program built from builtin operators with random
/// concrete shapes. Guaranteed to typecheck; result shape computed by the
/// oracle. Uses only value-positive math (no divide) so relative-error
/// comparisons stay meaningful.
GenProgram random_program(std::mt19937& rng, int max_ops);

/// A random dataflow DAG over synthetic single-shape operators with
/// explicit fusion patterns, for the fusion oracle tests.
oracle::Dag random_dag(std::mt19937& rng, int max_nodes);

/// Renders a random DAG as a module using the t_<pattern>_<arity> test
/// operators (which the caller must have registered); each call carries a
/// tag attribute equal to its node index.
std::string dag_to_module(const oracle::Dag& dag);

/// Random uniform tensor in (lo, hi), float32.
std::vector<float> random_floats(std::mt19937& rng, int64_t count, float lo, float hi);

}  // namespace testgen
