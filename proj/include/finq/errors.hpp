#pragma once

#include <stdexcept>
#include <string>

namespace finq {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad inputs: violated preconditions, malformed files, broken invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Instance exceeds a hard size cap (exhaustive enumeration, qubit budget).
class SizeError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures; message carries the offending path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace finq
