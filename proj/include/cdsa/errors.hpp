#pragma once

#include <stdexcept>

namespace cdsa {

// Bad call-site arguments or preconditions (CLI exit code 2).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed files or degenerate data (CLI exit code 3).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cdsa
