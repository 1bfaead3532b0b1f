#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cfx {

enum class ErrorCode {
  InvalidModel,
  ConstantClassifier,
  UnknownFeature,
  BadDistribution,
  EnumerationCapExceeded,
  InvalidInstance,
  InconsistentAssignment,
  EmptyPolynomialUnsatisfiable,
  MissingWeight,
  InvalidCondition,
  InfeasibleCondition,
  Infeasible,
  CapExceeded,
  VerificationCapExceeded,
  MissingColumn,
  TargetIsPrediction,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every library failure is reported through this type; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Infeasibility in any form: the problem, the conditions, or an empty polynomial forced to one.
inline bool is_infeasible(ErrorCode code) {
  return code == ErrorCode::Infeasible || code == ErrorCode::InfeasibleCondition ||
         code == ErrorCode::EmptyPolynomialUnsatisfiable;
}

inline bool is_cap_exceeded(ErrorCode code) {
  return code == ErrorCode::CapExceeded || code == ErrorCode::EnumerationCapExceeded ||
         code == ErrorCode::VerificationCapExceeded;
}

}  // namespace cfx
