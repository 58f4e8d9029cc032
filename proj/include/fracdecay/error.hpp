#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fracdecay {

enum class ErrorCode {
  InvalidArgument,
  RatioOutOfRange,
  ProbabilityInvalid,
  SeparationFailed,
  DegenerateTranslations,
  BudgetExceeded,
  LinearPhase,
  NonConvexPhase,
  InsufficientWindows,
  DomainError,
  OracleViolation,
  NoFeasiblePoint,
  ImaginaryResidue,
  PrecisionExceeded,
  ConfigError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::RatioOutOfRange: return "RatioOutOfRange";
    case ErrorCode::ProbabilityInvalid: return "ProbabilityInvalid";
    case ErrorCode::SeparationFailed: return "SeparationFailed";
    case ErrorCode::DegenerateTranslations: return "DegenerateTranslations";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::LinearPhase: return "LinearPhase";
    case ErrorCode::NonConvexPhase: return "NonConvexPhase";
    case ErrorCode::InsufficientWindows: return "InsufficientWindows";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::OracleViolation: return "OracleViolation";
    case ErrorCode::NoFeasiblePoint: return "NoFeasiblePoint";
    case ErrorCode::ImaginaryResidue: return "ImaginaryResidue";
    case ErrorCode::PrecisionExceeded: return "PrecisionExceeded";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when an exponential-size computation would exceed its atom or node
/// budget. `achievable_tol` is the best tolerance reachable within the budget
/// (NaN when not meaningful).
class BudgetError : public Error {
 public:
  BudgetError(const std::string& what, double achievable_tol)
      : Error(ErrorCode::BudgetExceeded, what), achievable_tol_(achievable_tol) {}

  [[nodiscard]] double achievable_tol() const noexcept { return achievable_tol_; }

 private:
  double achievable_tol_;
};

namespace detail {

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

}  // namespace detail
}  // namespace fracdecay
