#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tvgames {

enum class ErrorKind {
  NonSquare,
  DimensionTooLarge,
  DimensionMismatch,
  NonFinite,
  SolverFailure,
  WrongScheduleKind,
  IndexOutOfPeriod,
  InsufficientSamples,
  NonPositiveSamples,
  BapViolated,
  InvalidArgument,
  ConfigError,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries one of the kinds above so that
// callers (and tests) can branch on the cause without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tvgames
