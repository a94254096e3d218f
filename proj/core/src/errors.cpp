#include "hhmo/errors.hpp"

namespace hhmo {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Validation: return "ValidationError";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::NotSupercritical: return "NotSupercritical";
    case ErrorCode::RootNotBracketed: return "RootNotBracketed";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonFiniteField: return "NonFiniteField";
    case ErrorCode::EmptyFront: return "EmptyFront";
    case ErrorCode::InsufficientSnapshots: return "InsufficientSnapshots";
    case ErrorCode::ProbeOnFront: return "ProbeOnFront";
    case ErrorCode::DegenerateRate: return "DegenerateRate";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::Io: return "IoError";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::Validation:
    case ErrorCode::Parse:
    case ErrorCode::NotSupercritical:
    case ErrorCode::Io:
    case ErrorCode::GridMismatch:
    case ErrorCode::LengthMismatch:
      return false;
    default:
      return true;
  }
}

}  // namespace hhmo
