// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#include "microrelay/diagnostics.hpp"

namespace microrelay {

const char* diag_code_name(DiagCode code) {
  switch (code) {
    case DiagCode::UnboundVariable: return "UnboundVariable";
    case DiagCode::UnknownOperator: return "UnknownOperator";
    case DiagCode::UnknownConstructor: return "UnknownConstructor";
    case DiagCode::UnknownGlobal: return "UnknownGlobal";
    case DiagCode::MalformedLiteral: return "MalformedLiteral";
    case DiagCode::SyntaxError: return "SyntaxError";
    case DiagCode::MetaIndexOutOfRange: return "MetaIndexOutOfRange";
    case DiagCode::DuplicateOperator: return "DuplicateOperator";
    case DiagCode::TypeMismatch: return "TypeMismatch";
    case DiagCode::UnificationError: return "UnificationError";
    case DiagCode::RelationFailed: return "RelationFailed";
    case DiagCode::Underconstrained: return "Underconstrained";
    case DiagCode::ArityMismatch: return "ArityMismatch";
    case DiagCode::MissingRule: return "MissingRule";
    case DiagCode::CalibrationFailed: return "CalibrationFailed";
    case DiagCode::Uncalibrated: return "Uncalibrated";
    case DiagCode::UnsupportedLayout: return "UnsupportedLayout";
    case DiagCode::UnknownPass: return "UnknownPass";
    case DiagCode::FuelExhausted: return "FuelExhausted";
    case DiagCode::NameCollision: return "NameCollision";
    case DiagCode::MatchFailure: return "MatchFailure";
    case DiagCode::TrapDivideByZero: return "TrapDivideByZero";
    case DiagCode::OutOfFuel: return "OutOfFuel";
    case DiagCode::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace microrelay
