#pragma once

#include <stdexcept>
#include <string>

namespace phonedyn {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Shape or dimensionality disagreement between inputs.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input parsed fine but violates a data invariant (non-finite values,
/// overlapping tokens, empty sample sets, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace phonedyn
