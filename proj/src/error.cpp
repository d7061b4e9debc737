#include "langnav/error.hpp"

namespace langnav {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput: return "empty-input";
    case ErrorCode::ZeroPhrases: return "zero-phrases";
    case ErrorCode::IdOutOfRange: return "id-out-of-range";
    case ErrorCode::ShapeMismatch: return "shape-mismatch";
    case ErrorCode::LengthMismatch: return "length-mismatch";
    case ErrorCode::Divergence: return "divergence";
    case ErrorCode::UnknownWord: return "unknown-word";
    case ErrorCode::NoNoun: return "no-noun";
    case ErrorCode::NoMatch: return "no-match";
    case ErrorCode::EmptyMap: return "empty-map";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::InvariantViolation: return "invariant-violation";
    case ErrorCode::InvalidEndpoint: return "invalid-endpoint";
    case ErrorCode::PlanningFailure: return "planning-failure";
    case ErrorCode::NoPath: return "no-path";
    case ErrorCode::UnknownAsset: return "unknown-asset";
    case ErrorCode::InvalidConfig: return "invalid-config";
    case ErrorCode::UnknownSession: return "unknown-session";
    case ErrorCode::NoGoal: return "no-goal";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace langnav
