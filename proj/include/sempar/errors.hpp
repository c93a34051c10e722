#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sempar {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed linearized-tree text; offset is a 0-based character position.
struct TreeSyntaxError : Error {
  TreeSyntaxError(const std::string& msg, std::size_t offset)
      : Error(msg + " (at offset " + std::to_string(offset) + ")"), offset(offset) {}
  std::size_t offset;
};

/// Grammar source error with 1-based line/column.
struct DslSyntaxError : Error {
  DslSyntaxError(const std::string& msg, int line, int column)
      : Error(msg + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
        line(line),
        column(column) {}
  int line;
  int column;
};

/// Bad catalog TSV line; line is 1-based.
struct CatalogFormatError : Error {
  CatalogFormatError(const std::string& msg, int line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line(line) {}
  int line;
};

/// Semantic-action replay failed to match a pattern.
struct ActionError : Error {
  using Error::Error;
};

/// Replay finished with more than one value on the semantic stack.
struct StackNotSingletonError : Error {
  using Error::Error;
};

}  // namespace sempar
