#include "dcl/error.hpp"

namespace dcl {

const char *error_code_name(ErrorCode code) noexcept {
  switch (code) {
  case ErrorCode::InvalidInput: return "invalid-input";
  case ErrorCode::InvalidParameter: return "invalid-parameter";
  case ErrorCode::DegenerateInput: return "degenerate-input";
  case ErrorCode::InsufficientBatch: return "insufficient-batch";
  case ErrorCode::InsufficientInput: return "insufficient-input";
  case ErrorCode::NumericalDegeneracy: return "numerical-degeneracy";
  case ErrorCode::InvalidState: return "invalid-state";
  case ErrorCode::UndefinedCorrelation: return "undefined-correlation";
  case ErrorCode::Schema: return "schema";
  case ErrorCode::Parse: return "parse";
  case ErrorCode::Io: return "io";
  case ErrorCode::MissingView: return "missing-view";
  case ErrorCode::Divergence: return "divergence";
  }
  return "unknown";
}

} // namespace dcl
