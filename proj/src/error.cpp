#include "teamlens/error.hpp"

namespace teamlens {

std::string_view code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::DuplicateMember: return "DuplicateMember";
    case ErrorCode::SkillDimensionMismatch: return "SkillDimensionMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::ConvergenceRisk: return "ConvergenceRisk";
    case ErrorCode::OracleSizeExceeded: return "OracleSizeExceeded";
    case ErrorCode::NotATeamMember: return "NotATeamMember";
    case ErrorCode::AlreadyInTeam: return "AlreadyInTeam";
    case ErrorCode::EmptyCandidatePool: return "EmptyCandidatePool";
    case ErrorCode::AllZeroRequirement: return "AllZeroRequirement";
    case ErrorCode::AllZeroTeam: return "AllZeroTeam";
    case ErrorCode::TeamTooSmall: return "TeamTooSmall";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownNodeRef: return "UnknownNodeRef";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::NegativeSkill: return "NegativeSkill";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::Conflict: return "Conflict";
    case ErrorCode::UnknownNetwork: return "UnknownNetwork";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::PortInUse: return "PortInUse";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) noexcept {
  return code == ErrorCode::NotConverged || code == ErrorCode::ConvergenceRisk;
}

}  // namespace teamlens
