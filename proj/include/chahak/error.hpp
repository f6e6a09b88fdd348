#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chahak {

// Bad input or configuration. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed row in a CSV input. `row` is 1-based and counts the header.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t row, const std::string& what)
      : ValidationError("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// A likelihood or objective that cannot be represented as a finite number.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable input or unwritable output. Maps to CLI exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace chahak
