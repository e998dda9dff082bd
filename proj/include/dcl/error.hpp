#pragma once

#include <stdexcept>
#include <string>

namespace dcl {

/// Failure categories shared by every module. The numeric values are the
/// status codes returned through the C API.
enum class ErrorCode : int {
  InvalidInput = 1,
  InvalidParameter = 2,
  DegenerateInput = 3,
  InsufficientBatch = 4,
  InsufficientInput = 5,
  NumericalDegeneracy = 6,
  InvalidState = 7,
  UndefinedCorrelation = 8,
  Schema = 9,
  Parse = 10,
  Io = 11,
  MissingView = 12,
  Divergence = 13,
};

const char *error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string &what) {
  throw Error(code, what);
}

} // namespace dcl
