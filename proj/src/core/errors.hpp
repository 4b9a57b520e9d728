#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qpat {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad radius range, bad dims, ...).
struct InvalidArgument : Error {
  using Error::Error;
};

/// Configuration rejected; carries the full list of violations.
struct ValidationError : Error {
  std::vector<std::string> violations;
  explicit ValidationError(std::vector<std::string> v)
      : Error(join(v)), violations(std::move(v)) {}
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "configuration invalid:";
    for (const auto& m : v) s += "\n  - " + m;
    return s;
  }
};

/// Iterative solver failed to reach the requested tolerance.
struct SolverError : Error {
  using Error::Error;
};

/// Data degeneracy (non-positive v1, vanishing quotient denominator, ...).
struct DegenerateData : Error {
  using Error::Error;
};

/// File system / serialization failure.
struct IoError : Error {
  using Error::Error;
};

}  // namespace qpat
