#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kc {

enum class ErrorCode {
  NotPositiveDefinite,
  NoConvergence,
  DegenerateData,
  DegenerateCovariance,
  InsufficientData,
  NonFiniteLoss,
  DimensionMismatch,
  InvalidLevel,
  NonBinaryLabels,
  SingularGram,
  MissingLabels,
  UnknownMethod,
  InvalidArity,
  EmptyH1,
  PreconditionViolated,
  FormatError,
  IoError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Library-wide exception. The code identifies the failure class named in
/// each operation's contract; the message carries the details.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace kc
