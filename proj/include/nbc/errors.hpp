#pragma once

#include <stdexcept>
#include <string>

namespace nbc {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An argument violates a documented precondition (bad dimension, unknown
// benchmark name, malformed file, ...).
struct InvalidInputError : Error {
  using Error::Error;
};

// An internal contract was broken (stale trace, infeasible contraction, ...).
struct ContractError : Error {
  using Error::Error;
};

// A numeric operation left its domain (division by an interval containing 0).
struct NumericError : Error {
  using Error::Error;
};

// A configured resource budget was exceeded.
struct ResourceLimitError : Error {
  using Error::Error;
};

}  // namespace nbc
