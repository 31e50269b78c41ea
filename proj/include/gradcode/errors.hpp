#pragma once

#include <stdexcept>

namespace gradcode {

// Breakdown of a numeric guarantee (decode residual, divergence, Gamma pole).
// The CLI maps this to a distinct exit code.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gradcode
