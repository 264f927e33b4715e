#pragma once

#include <stdexcept>
#include <string>

namespace nlslab {

// Every failure mode carries a stable code so callers (and the CLI) can map
// it to an exit class without parsing messages.
enum class ErrorCode {
  // configuration / argument errors
  InvalidArgument,
  ConfigInvalid,
  NonPowerOfTwo,
  TruncationRisk,
  EmptyProbeSet,
  PoleAtTwo,
  UnsupportedExponent,
  SigmaTooLarge,
  DistanceNotSmall,
  // numerical failures
  MassDrift,
  NoConvergence,
  DivergentAtZero,
  QuadratureBudgetExceeded,
  NormalizationUnderflow,
  DegenerateFit,
  // i/o
  IoFailure,
};

enum class ErrorKind { Config, Numerical, Io };

inline ErrorKind kind_of(ErrorCode c) {
  switch (c) {
    case ErrorCode::MassDrift:
    case ErrorCode::NoConvergence:
    case ErrorCode::DivergentAtZero:
    case ErrorCode::QuadratureBudgetExceeded:
    case ErrorCode::NormalizationUnderflow:
    case ErrorCode::DegenerateFit:
      return ErrorKind::Numerical;
    case ErrorCode::IoFailure:
      return ErrorKind::Io;
    default:
      return ErrorKind::Config;
  }
}

inline const char* name_of(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::NonPowerOfTwo: return "NonPowerOfTwo";
    case ErrorCode::TruncationRisk: return "TruncationRisk";
    case ErrorCode::EmptyProbeSet: return "EmptyProbeSet";
    case ErrorCode::PoleAtTwo: return "PoleAtTwo";
    case ErrorCode::UnsupportedExponent: return "UnsupportedExponent";
    case ErrorCode::SigmaTooLarge: return "SigmaTooLarge";
    case ErrorCode::DistanceNotSmall: return "DistanceNotSmall";
    case ErrorCode::MassDrift: return "MassDrift";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DivergentAtZero: return "DivergentAtZero";
    case ErrorCode::QuadratureBudgetExceeded: return "QuadratureBudgetExceeded";
    case ErrorCode::NormalizationUnderflow: return "NormalizationUnderflow";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(name_of(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }
  ErrorKind kind() const { return kind_of(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace nlslab
