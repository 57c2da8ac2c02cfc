// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "microrelay/diagnostics.hpp"

namespace microrelay {

/// Attribute values attached to calls and functions. Kept intentionally
/// small: integers, reals, flags, strings, and integer tuples cover every
/// operator attribute in the registry.
using AttrValue = std::variant<int64_t, double, bool, std::string, std::vector<int64_t>>;

// std::map so iteration (printing, hashing) is deterministic.
using AttrMap = std::map<std::string, AttrValue>;

enum class AttrKind : uint8_t { Int, Float, Bool, String, IntList };

AttrKind attr_kind(const AttrValue& v);
std::string attr_value_str(const AttrValue& v);
bool attr_equal(const AttrValue& a, const AttrValue& b);
bool attr_map_equal(const AttrMap& a, const AttrMap& b);

// Typed lookups. The *_or forms return the fallback when the key is absent;
// the required forms throw Diagnostic(TypeMismatch) on absence or kind error.
int64_t attr_int(const AttrMap& m, const std::string& key, const SourceSpan& span);
int64_t attr_int_or(const AttrMap& m, const std::string& key, int64_t fallback);
double attr_float(const AttrMap& m, const std::string& key, const SourceSpan& span);
std::optional<double> attr_float_opt(const AttrMap& m, const std::string& key);
bool attr_bool_or(const AttrMap& m, const std::string& key, bool fallback);
std::string attr_string(const AttrMap& m, const std::string& key, const SourceSpan& span);
std::string attr_string_or(const AttrMap& m, const std::string& key, std::string fallback);
std::vector<int64_t> attr_int_list(const AttrMap& m, const std::string& key, const SourceSpan& span);
std::optional<std::vector<int64_t>> attr_int_list_opt(const AttrMap& m, const std::string& key);

}  // namespace microrelay
