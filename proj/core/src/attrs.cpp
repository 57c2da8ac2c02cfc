// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#include "microrelay/attrs.hpp"

#include <cmath>
#include <sstream>

namespace microrelay {

AttrKind attr_kind(const AttrValue& v) {
  switch (v.index()) {
    case 0: return AttrKind::Int;
    case 1: return AttrKind::Float;
    case 2: return AttrKind::Bool;
    case 3: return AttrKind::String;
    default: return AttrKind::IntList;
  }
}

std::string attr_value_str(const AttrValue& v) {
  std::ostringstream os;
  if (auto* i = std::get_if<int64_t>(&v)) {
    os << *i;
  } else if (auto* d = std::get_if<double>(&v)) {
    os.precision(17);
    os << *d;
    if (*d == std::floor(*d) && std::isfinite(*d)) os << ".0";
  } else if (auto* b = std::get_if<bool>(&v)) {
    os << (*b ? "true" : "false");
  } else if (auto* s = std::get_if<std::string>(&v)) {
    os << '"' << *s << '"';
  } else {
    const auto& xs = std::get<std::vector<int64_t>>(v);
    os << "(";
    for (size_t i = 0; i < xs.size(); ++i) {
      if (i) os << ", ";
      os << xs[i];
    }
    os << ")";
  }
  return os.str();
}

bool attr_equal(const AttrValue& a, const AttrValue& b) { return a == b; }

bool attr_map_equal(const AttrMap& a, const AttrMap& b) {
  if (a.size() != b.size()) return false;
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first || !(ia->second == ib->second)) return false;
  }
  return true;
}

namespace {
[[noreturn]] void bad_attr(const std::string& key, const char* want, const SourceSpan& span) {
  diag_throw(DiagCode::TypeMismatch, "attribute '" + key + "' missing or not " + want, span);
}
}  // namespace

int64_t attr_int(const AttrMap& m, const std::string& key, const SourceSpan& span) {
  auto it = m.find(key);
  if (it == m.end()) bad_attr(key, "an int", span);
  if (auto* i = std::get_if<int64_t>(&it->second)) return *i;
  bad_attr(key, "an int", span);
}

int64_t attr_int_or(const AttrMap& m, const std::string& key, int64_t fallback) {
  auto it = m.find(key);
  if (it == m.end()) return fallback;
  if (auto* i = std::get_if<int64_t>(&it->second)) return *i;
  return fallback;
}

double attr_float(const AttrMap& m, const std::string& key, const SourceSpan& span) {
  auto it = m.find(key);
  if (it == m.end()) bad_attr(key, "a float", span);
  if (auto* d = std::get_if<double>(&it->second)) return *d;
  if (auto* i = std::get_if<int64_t>(&it->second)) return static_cast<double>(*i);
  bad_attr(key, "a float", span);
}

std::optional<double> attr_float_opt(const AttrMap& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) return std::nullopt;
  if (auto* d = std::get_if<double>(&it->second)) return *d;
  if (auto* i = std::get_if<int64_t>(&it->second)) return static_cast<double>(*i);
  return std::nullopt;
}

bool attr_bool_or(const AttrMap& m, const std::string& key, bool fallback) {
  auto it = m.find(key);
  if (it == m.end()) return fallback;
  if (auto* b = std::get_if<bool>(&it->second)) return *b;
  if (auto* i = std::get_if<int64_t>(&it->second)) return *i != 0;
  return fallback;
}

std::string attr_string(const AttrMap& m, const std::string& key, const SourceSpan& span) {
  auto it = m.find(key);
  if (it == m.end()) bad_attr(key, "a string", span);
  if (auto* s = std::get_if<std::string>(&it->second)) return *s;
  bad_attr(key, "a string", span);
}

std::string attr_string_or(const AttrMap& m, const std::string& key, std::string fallback) {
  auto it = m.find(key);
  if (it == m.end()) return fallback;
  if (auto* s = std::get_if<std::string>(&it->second)) return *s;
  return fallback;
}

std::vector<int64_t> attr_int_list(const AttrMap& m, const std::string& key,
                                   const SourceSpan& span) {
  auto it = m.find(key);
  if (it == m.end()) bad_attr(key, "an int list", span);
  if (auto* xs = std::get_if<std::vector<int64_t>>(&it->second)) return *xs;
  if (auto* i = std::get_if<int64_t>(&it->second)) return {*i};
  bad_attr(key, "an int list", span);
}

std::optional<std::vector<int64_t>> attr_int_list_opt(const AttrMap& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) return std::nullopt;
  if (auto* xs = std::get_if<std::vector<int64_t>>(&it->second)) return *xs;
  if (auto* i = std::get_if<int64_t>(&it->second)) return std::vector<int64_t>{*i};
  return std::nullopt;
}

}  // namespace microrelay
