#pragma once

#include <stdexcept>
#include <string>

namespace pnal {

// Validation problems raise std::invalid_argument; file problems raise IoError.
// The CLI maps the former to exit code 1 and the latter to exit code 2.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pnal
