#pragma once

#include <stdexcept>

namespace alloylab {

// Error categories map onto the CLI exit codes:
//   ParseError -> 2, PreconditionError -> 3, NumericalError -> 4, ResourceError -> 5.

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace alloylab
