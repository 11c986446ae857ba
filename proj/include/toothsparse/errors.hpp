#ifndef TOOTHSPARSE_ERRORS_HPP
#define TOOTHSPARSE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace toothsparse {

/// Malformed or inconsistent input: bad files, unknown labels, cardinality
/// mismatches, checksum failures.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& message) : std::runtime_error(message) {}
};

/// Numerical failure: degenerate geometry, singular linear systems,
/// non-convergence of an iterative solver.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& message) : std::runtime_error(message) {}
};

/// A prediction was requested but no adjacent support teeth exist.
class NoSupportError : public DataError {
 public:
  explicit NoSupportError(const std::string& message) : DataError(message) {}
};

}  // namespace toothsparse

#endif  // TOOTHSPARSE_ERRORS_HPP
