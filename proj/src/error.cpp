#include "gridhier/error.hpp"

namespace gridhier {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::MissingSecondary: return "MissingSecondary";
    case ErrorCode::ParticipationSumViolated: return "ParticipationSumViolated";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::InvalidCost: return "InvalidCost";
    case ErrorCode::InvalidRegulation: return "InvalidRegulation";
    case ErrorCode::ZeroDisturbance: return "ZeroDisturbance";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::Divergence: return "Divergence";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::SingularOperator: return "SingularOperator";
    case ErrorCode::DegenerateDamping: return "DegenerateDamping";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::EigenFailure:
    case ErrorCode::Divergence:
    case ErrorCode::Timeout:
    case ErrorCode::SingularOperator:
    case ErrorCode::DegenerateDamping:
      return 2;
    case ErrorCode::ParseError:
    case ErrorCode::IoError:
      return 3;
    default:
      return 1;
  }
}

}  // namespace gridhier
