#pragma once

#include <stdexcept>
#include <string>

namespace phs {

/// Base class for all errors thrown by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when a discrete system cannot be assembled (invalid model,
/// boundary-condition/grid mismatch, degenerate grid).
struct AssemblyError : Error {
  using Error::Error;
};

/// Raised by the time integrator (singular midpoint matrix, non-finite data).
struct SolverError : Error {
  using Error::Error;
};

}  // namespace phs
