#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace shelfwise {

enum class ErrorCode {
  InvalidArgument,
  Io,
  MissingColumn,
  MalformedRow,
  UnknownObject,
  UnknownQuantityClass,
  CapacityTooSmall,
  NoRates,
  BatchExceedsCapacity,
  NotIrreducible,
  SolverFailure,
};

std::string_view to_string(ErrorCode code);

// Base for every failure raised by the library. The code is stable and is what
// the CLI and the HTTP service map to exit codes / status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class MalformedRowError : public Error {
 public:
  MalformedRowError(std::size_t line, const std::string& reason)
      : Error(ErrorCode::MalformedRow,
              "malformed row at line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(reason) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

}  // namespace shelfwise
