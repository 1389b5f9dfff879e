#pragma once

#include <stdexcept>
#include <string>

namespace pdlsl {

// Syntax-level failure with source position (1-based line/column).
struct ParseError : std::runtime_error {
  int line;
  int col;
  ParseError(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg + " (line " + std::to_string(line_) + ", col " +
                           std::to_string(col_) + ")"),
        line(line_), col(col_) {}
};

// Well-formed syntax, bad content: missing files, broken invariants in
// inputs, unknown names, arity/sort mismatches during reduction.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pdlsl
