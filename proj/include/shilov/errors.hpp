#pragma once

#include <stdexcept>
#include <string>

namespace shilov {

struct ShilovError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operand shapes do not agree.
struct DimensionError : ShilovError {
  using ShilovError::ShilovError;
};

// A payload or input violates a stated algebraic constraint
// (off the boundary, non-Hermitian H, V*W != I, ...).
struct ConstraintError : ShilovError {
  using ShilovError::ShilovError;
};

// Jet truncation order too small for the requested operation.
struct JetOrderError : ShilovError {
  using ShilovError::ShilovError;
};

// Rank collapse, singular pivots and other numeric failures.
struct NumericError : ShilovError {
  using ShilovError::ShilovError;
};

}  // namespace shilov
