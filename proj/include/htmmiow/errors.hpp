#pragma once

// Exception hierarchy shared across the library. The CLI maps these onto
// exit codes: malformed input data exits 2, numerical failures exit 3,
// flag/usage problems exit 1.

#include <stdexcept>
#include <string>

namespace htmmiow {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// The caller's data or parameters are wrong.
struct DataError : Error {
  using Error::Error;
};
struct InvalidArgument : DataError {
  using DataError::DataError;
};
struct ShapeError : DataError {
  using DataError::DataError;
};
struct ParseError : DataError {
  using DataError::DataError;
};

// Numerical breakdowns discovered while fitting or optimizing.
struct NumericalError : Error {
  using Error::Error;
};
struct SingularDesign : NumericalError {
  using NumericalError::NumericalError;
};
struct Separation : NumericalError {
  using NumericalError::NumericalError;
};
struct DegenerateOutcome : NumericalError {
  using NumericalError::NumericalError;
};
struct WeightModelFailure : NumericalError {
  using NumericalError::NumericalError;
};
struct TestFailure : NumericalError {
  using NumericalError::NumericalError;
};
struct BootstrapFailure : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace htmmiow
