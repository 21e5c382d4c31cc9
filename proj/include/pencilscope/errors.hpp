#pragma once

#include <stdexcept>
#include <string>

namespace pencilscope {

// Stable error codes; the CLI renders these verbatim so scripts can match on them.
enum class ErrorCode {
  NotHermitian,
  NoConvergence,
  SingularJ,
  DimensionMismatch,
  SingularLeadingCoefficient,
  NotSelfadjoint,
  MatchingAmbiguous,
  OrderUndetermined,
  FlagDegenerate,
  DegenerateGram,
  NotSimple,
  DerivativeBelowNoise,
  NotGeometricMultOne,
  NotSemisimple,
  ComplexRootsDetected,
  RootOnContour,
  PhaseStepTooLarge,
  NotPositiveDefinite,
  KernelsNotOrthogonal,
  NotReal,
  Inconsistent,
  ParseError,
  SchemaError,
  InvariantViolation,
  IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularJ: return "SingularJ";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularLeadingCoefficient: return "SingularLeadingCoefficient";
    case ErrorCode::NotSelfadjoint: return "NotSelfadjoint";
    case ErrorCode::MatchingAmbiguous: return "MatchingAmbiguous";
    case ErrorCode::OrderUndetermined: return "OrderUndetermined";
    case ErrorCode::FlagDegenerate: return "FlagDegenerate";
    case ErrorCode::DegenerateGram: return "DegenerateGram";
    case ErrorCode::NotSimple: return "NotSimple";
    case ErrorCode::DerivativeBelowNoise: return "DerivativeBelowNoise";
    case ErrorCode::NotGeometricMultOne: return "NotGeometricMultOne";
    case ErrorCode::NotSemisimple: return "NotSemisimple";
    case ErrorCode::ComplexRootsDetected: return "ComplexRootsDetected";
    case ErrorCode::RootOnContour: return "RootOnContour";
    case ErrorCode::PhaseStepTooLarge: return "PhaseStepTooLarge";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::KernelsNotOrthogonal: return "KernelsNotOrthogonal";
    case ErrorCode::NotReal: return "NotReal";
    case ErrorCode::Inconsistent: return "Inconsistent";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace pencilscope
