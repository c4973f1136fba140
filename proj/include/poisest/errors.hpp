#pragma once

#include <stdexcept>
#include <string>

namespace poisest {

enum class ErrorKind {
  NonPositiveIntensity,
  DomainError,
  EnvelopeError,
  ParseError,
  UnsortedEvents,
  NonConvergence,
  SingularFisher,
  SingularJacobian,
  DegenerateMoments,
  OutOfRange,
  NoSolution,
  DeltaOutOfRange,
  ConfigError,
  DimensionMismatch,
  TooFewSamples,
  EmptySample,
  StudyAborted,
  IoError,
};

[[nodiscard]] const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the whole library; `kind()` routes CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace poisest
