#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hhmo {

enum class ErrorCode {
  Validation,
  Parse,
  NotSupercritical,
  RootNotBracketed,
  LengthMismatch,
  NonFiniteField,
  EmptyFront,
  InsufficientSnapshots,
  ProbeOnFront,
  DegenerateRate,
  GridMismatch,
  Io,
};

std::string_view to_string(ErrorCode code);

// Numerical failures map to CLI exit status 2, input problems to 1.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hhmo
