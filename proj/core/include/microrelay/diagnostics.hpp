// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace microrelay {

/// Location of a syntactic element in a source file. Line/column are
/// 1-based; a zero start_line marks an unknown/synthesized location.
struct SourceSpan {
  std::string file;
  int start_line = 0;
  int start_col = 0;
  int end_line = 0;
  int end_col = 0;

  static SourceSpan unknown() { return SourceSpan{}; }
  bool known() const { return start_line > 0; }
  std::string str() const {
    if (!known()) return "<unknown>";
    std::ostringstream os;
    os << (file.empty() ? "<input>" : file) << ":" << start_line << ":" << start_col;
    return os.str();
  }
};

enum class DiagCode {
  // well-formedness
  UnboundVariable,
  UnknownOperator,
  UnknownConstructor,
  UnknownGlobal,
  MalformedLiteral,
  // parsing
  SyntaxError,
  MetaIndexOutOfRange,
  // registry
  DuplicateOperator,
  // type checking
  TypeMismatch,
  UnificationError,
  RelationFailed,
  Underconstrained,
  ArityMismatch,
  // passes
  MissingRule,
  CalibrationFailed,
  Uncalibrated,
  UnsupportedLayout,
  UnknownPass,
  FuelExhausted,
  NameCollision,
  // runtime traps
  MatchFailure,
  TrapDivideByZero,
  OutOfFuel,
  // catch-all
  Internal,
};

const char* diag_code_name(DiagCode code);

/// The error currency of the compiler: every user-visible failure is thrown
/// as a Diagnostic carrying a code, a message, and the span it refers to.
class Diagnostic : public std::runtime_error {
 public:
  Diagnostic(DiagCode code, std::string message, SourceSpan span = SourceSpan::unknown())
      : std::runtime_error(render(code, message, span)),
        code_(code),
        message_(std::move(message)),
        span_(std::move(span)) {}

  DiagCode code() const { return code_; }
  const std::string& message() const { return message_; }
  const SourceSpan& span() const { return span_; }

 private:
  static std::string render(DiagCode code, const std::string& message, const SourceSpan& span) {
    std::ostringstream os;
    if (span.known()) os << span.str() << ": ";
    os << diag_code_name(code) << ": " << message;
    return os.str();
  }

  DiagCode code_;
  std::string message_;
  SourceSpan span_;
};

[[noreturn]] inline void diag_throw(DiagCode code, const std::string& message,
                                    SourceSpan span = SourceSpan::unknown()) {
  throw Diagnostic(code, message, std::move(span));
}

// Internal invariant check. Not for user-facing error paths.
#define MREL_CHECK(cond, msg)                                                   \
  do {                                                                          \
    if (!(cond)) {                                                              \
      ::microrelay::diag_throw(::microrelay::DiagCode::Internal,                \
                               std::string("check failed: ") + #cond + ": " + (msg)); \
    }                                                                           \
  } while (0)

}  // namespace microrelay
