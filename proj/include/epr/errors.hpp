#pragma once

#include <stdexcept>

namespace epr {

// Error kinds map onto CLI exit codes: validation -> 2, io -> 3, format -> 4.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace epr
