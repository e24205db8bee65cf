#pragma once

#include <stdexcept>
#include <string>

namespace mrl {

enum class ErrorCode {
  NonSymmetric,
  SingularWell,
  EmptyFamily,
  NonPositiveWell,
  NotConnected,
  DegenerateSpectrum,
  NotGeneric,
  MarginNonPositive,
  NoConstantsFound,
  DegenerateSimplex,
  SingularSystem,
  NoMajority,
  EmptyGoodSet,
  BoundaryTooClose,
  HypothesisViolated,
  NoGoodSimplex,
  BadParams,
};

/// Numerical failure with a machine-checkable code. Input/usage errors
/// (bad flags, malformed JSON) use std::invalid_argument instead.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

inline const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonSymmetric: return "NonSymmetric";
    case ErrorCode::SingularWell: return "SingularWell";
    case ErrorCode::EmptyFamily: return "EmptyFamily";
    case ErrorCode::NonPositiveWell: return "NonPositiveWell";
    case ErrorCode::NotConnected: return "NotConnected";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::NotGeneric: return "NotGeneric";
    case ErrorCode::MarginNonPositive: return "MarginNonPositive";
    case ErrorCode::NoConstantsFound: return "NoConstantsFound";
    case ErrorCode::DegenerateSimplex: return "DegenerateSimplex";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NoMajority: return "NoMajority";
    case ErrorCode::EmptyGoodSet: return "EmptyGoodSet";
    case ErrorCode::BoundaryTooClose: return "BoundaryTooClose";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::NoGoodSimplex: return "NoGoodSimplex";
    case ErrorCode::BadParams: return "BadParams";
  }
  return "Unknown";
}

}  // namespace mrl
