#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wpar {

// Violated precondition or invalid argument value (bad shapes, non-finite
// input, out-of-range parameters).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or unreadable input file. `line` is 1-based, 0 when the problem
// is not tied to a line (e.g. a binary header).
class DataError : public std::runtime_error {
 public:
  DataError(std::string path, std::size_t line, const std::string& message)
      : std::runtime_error(Format(path, line, message)),
        path_(std::move(path)),
        line_(line) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string Format(const std::string& path, std::size_t line,
                            const std::string& message) {
    std::string out = path;
    if (line > 0) out += ":" + std::to_string(line);
    return out + ": " + message;
  }

  std::string path_;
  std::size_t line_;
};

// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wpar
