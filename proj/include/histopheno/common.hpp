#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace histopheno {

inline constexpr std::string_view kVersion = "0.1.0";

// Base for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad input: contract violations, malformed configuration, impossible requests.
// Maps to process exit code 2.
struct ValidationError : Error {
  using Error::Error;
};

// Malformed input file. Messages carry file name and line number.
struct ParseError : ValidationError {
  using ValidationError::ValidationError;
};

// Numerical failure: separation, collinearity, divergence, inconsistent geometry.
// Maps to process exit code 3.
struct NumericError : Error {
  using Error::Error;
};

}  // namespace histopheno
