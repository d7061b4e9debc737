#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace langnav {

enum class ErrorCode {
  EmptyInput,
  ZeroPhrases,
  IdOutOfRange,
  ShapeMismatch,
  LengthMismatch,
  Divergence,
  UnknownWord,
  NoNoun,
  NoMatch,
  EmptyMap,
  Parse,
  InvariantViolation,
  InvalidEndpoint,
  PlanningFailure,
  NoPath,
  UnknownAsset,
  InvalidConfig,
  UnknownSession,
  NoGoal,
  Io,
};

std::string_view error_code_name(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace langnav
