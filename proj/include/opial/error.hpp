#pragma once

#include <stdexcept>
#include <string>

namespace opial {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates a domain invariant (masses, support order, lengths).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside its stated input class
/// (non-zero mean for Wirtinger, degenerate corollary split, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Brute-force enumeration would exceed the configured summand budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// An iterative solver hit its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace opial
