#pragma once

#include <stdexcept>
#include <string>

namespace dmaps {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violates a structural precondition (non-finite entries,
/// histograms that do not sum to one, mismatched lengths, ...).
class InvalidData : public Error {
 public:
  using Error::Error;
};

/// A scalar parameter is outside its admissible range.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Data are well formed but carry no usable scale (e.g. all points coincide).
class DegenerateData : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical routine failed to converge.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Inconsistent pipeline configuration (e.g. EMD requested on raw points).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dmaps
