#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xlner {

// Base class for every failure raised by the toolkit on bad input data.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text in one of the on-disk formats. `line()` is 1-based, 0 when
// the error is not tied to a line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Inputs that parse fine but are inconsistent with each other.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace xlner
