#pragma once

#include <stdexcept>
#include <string>

namespace shapeseg {

/// Malformed, missing, or dimensionally inconsistent input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numeric procedure diverged or hit a singular configuration.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace shapeseg
