#pragma once

#include <stdexcept>
#include <string>

namespace rekey {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when modules cannot be composed (e.g. clashing variable names).
class CompositionError : public Error {
 public:
  using Error::Error;
};

/// Raised when a model is structurally ill-formed at exploration time
/// (negative rates, updates escaping a variable's range, unbound names).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Raised when exploration exceeds the configured state/transition budget.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Raised when an iterative solver fails to converge within its budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Raised for query-level failures (empty filter set, no reset transitions).
class QueryError : public Error {
 public:
  using Error::Error;
};

}  // namespace rekey
