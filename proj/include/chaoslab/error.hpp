#pragma once

#include <stdexcept>
#include <string>

namespace chaoslab {

// Numerical or domain failure inside a pipeline.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed JSON, invalid flags, violated preconditions on
// configuration values. The CLI maps these to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace chaoslab
