#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gridhier {

/// Failure classes raised by the library. Each maps onto one CLI exit code
/// through `exit_code_for`.
enum class ErrorCode {
  // input / precondition problems
  InvalidScenario,
  MissingSecondary,
  ParticipationSumViolated,
  Infeasible,
  TooLarge,
  InvalidCost,
  InvalidRegulation,
  ZeroDisturbance,
  // numerical failures
  EigenFailure,
  Divergence,
  Timeout,
  SingularOperator,
  DegenerateDamping,
  // I/O
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// 1 = validation/precondition, 2 = numerical, 3 = I/O or parse.
int exit_code_for(ErrorCode code);

}  // namespace gridhier
