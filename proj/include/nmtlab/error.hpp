#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nmtlab {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Source and target files disagree on line count.
class AlignmentError : public Error {
  public:
    AlignmentError(std::size_t source_lines, std::size_t target_lines)
        : Error("alignment error: source has " + std::to_string(source_lines) +
                " lines, target has " + std::to_string(target_lines)),
          source_lines_(source_lines), target_lines_(target_lines) {}

    std::size_t source_lines() const { return source_lines_; }
    std::size_t target_lines() const { return target_lines_; }

  private:
    std::size_t source_lines_;
    std::size_t target_lines_;
};

// Malformed input text; line is 1-based, 0 when unknown.
class ParseError : public Error {
  public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

class DecodeError : public ParseError {
  public:
    using ParseError::ParseError;
};

// A numeric precondition was violated (zero variance, empty sample, ...).
class DomainError : public Error {
  public:
    using Error::Error;
};

} // namespace nmtlab

namespace nmtlab::nnet {

// A layer produced NaN or Inf; the message names the layer (or step).
class NumericError : public nmtlab::Error {
  public:
    using nmtlab::Error::Error;
};

} // namespace nmtlab::nnet
