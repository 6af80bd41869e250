#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace teamlens {

enum class ErrorCode {
  UnknownNode,
  DuplicateMember,
  SkillDimensionMismatch,
  DimensionMismatch,
  InvalidParams,
  NotConverged,
  ConvergenceRisk,
  OracleSizeExceeded,
  NotATeamMember,
  AlreadyInTeam,
  EmptyCandidatePool,
  AllZeroRequirement,
  AllZeroTeam,
  TeamTooSmall,
  ParseError,
  UnknownNodeRef,
  NegativeWeight,
  NegativeSkill,
  UnsupportedFormat,
  Conflict,
  UnknownNetwork,
  ValidationError,
  IoError,
  PortInUse,
};

/// Stable machine-readable name, e.g. "TeamTooSmall".
std::string_view code_name(ErrorCode code) noexcept;

/// Whether the error comes from numerical non-convergence rather than bad input.
bool is_numerical(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(message), code_(code), line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  /// 1-based source line for input errors.
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace teamlens
