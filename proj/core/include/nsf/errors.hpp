// Error types shared across the library.
#pragma once

#include <stdexcept>

namespace nsf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A matrix that must be positive definite could not be factorized, even
// after the maximum diagonal loading.
class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

// An iterative routine failed to converge within its iteration budget.
class NoConvergence : public Error {
 public:
  using Error::Error;
};

// Arguments outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Inconsistent or invalid configuration (dimensions, window setup, files).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Log-domain combination failed to produce a finite value.
class NumericalOverflow : public Error {
 public:
  using Error::Error;
};

// An EM mixture component collapsed and could not be recovered.
class DegenerateComponent : public Error {
 public:
  using Error::Error;
};

// A metrics segment with no usable target energy was requested.
class DegenerateSegment : public Error {
 public:
  using Error::Error;
};

// WAV or filesystem I/O failure.
class FileError : public Error {
 public:
  using Error::Error;
};

}  // namespace nsf
