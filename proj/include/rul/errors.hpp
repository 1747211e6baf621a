// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rul {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input text (wrong field count, non-numeric token).
struct ParseError : Error {
  ParseError(const std::string& msg, std::size_t line_no)
      : Error(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
  std::size_t line;
};

/// Structurally inconsistent data (counts, orderings, shape mismatches).
struct StructuralError : Error {
  using Error::Error;
};

/// Invalid value (negative label, non-finite input, bad argument).
struct ValueError : Error {
  using Error::Error;
};

/// Factorization or linear-solve failure.
struct SolverError : Error {
  using Error::Error;
};

/// Non-finite intermediate detected during numeric computation.
struct NumericError : Error {
  using Error::Error;
};

/// Bad configuration file, unknown option, or unusable model file.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace rul
