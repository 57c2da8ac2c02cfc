// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Reference numeric kernels backing the builtin operators. Internal to the
// registry; everything goes through OperatorDecl::eval.

#pragma once

#include "microrelay/registry.hpp"

namespace microrelay::kernels {

ValueRef add(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef subtract(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef multiply(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef divide(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef minimum(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef maximum(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef equal(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef not_equal(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef less(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef greater_equal(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef logical_and(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef negative(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef exp(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef tanh(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef sigmoid(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef relu(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef round(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef clip(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef cast(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef simulated_quantize(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef reshape(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef transpose(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef squeeze(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef expand_dims(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef sum(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef max_reduce(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef min_reduce(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef argmax(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef dense(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef conv2d(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef bias_add(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef concat(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);
ValueRef split(const std::vector<ValueRef>&, const AttrMap&, const SourceSpan&);

/// Narrows an int64 to the given integer base type (two's-complement wrap).
int64_t wrap_int(int64_t v, const BaseType& bt);

}  // namespace microrelay::kernels
