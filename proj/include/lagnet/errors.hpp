#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lagnet {

/// Caller violated a precondition (dimensions, ranges, malformed input).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation produced a non-finite value.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what, std::vector<double> input = {})
      : std::runtime_error(what), input_(std::move(input)) {}

  /// The input at which the failure occurred, when known.
  const std::vector<double>& input() const noexcept { return input_; }

 private:
  std::vector<double> input_;
};

/// Reading or writing a file failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file contents. `line` is 1-based; 0 when not tied to a line.
class FormatError : public UsageError {
 public:
  FormatError(const std::string& what, std::size_t line)
      : UsageError(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

std::string describe_vector(const std::vector<double>& v);

}  // namespace lagnet
