#pragma once

#include <stdexcept>
#include <string>

namespace qms {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation at a singular point of a realization, chart or potential.
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Index or count outside its admissible range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent system or experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// No regular phase-space sample could be drawn.
class SamplingError : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

}  // namespace qms
