#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wheelflat {

/// Malformed input file. Carries the offending path and 1-based line number
/// (0 when the problem is not tied to a line).
class FormatError : public std::runtime_error {
 public:
  FormatError(std::string path, std::size_t line, const std::string& message)
      : std::runtime_error(describe(path, line, message)),
        path_(std::move(path)),
        line_(line),
        message_(message) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& message() const noexcept { return message_; }

 private:
  static std::string describe(const std::string& path, std::size_t line,
                              const std::string& message) {
    std::string out = path;
    if (line > 0) out += ":" + std::to_string(line);
    return out + ": " + message;
  }

  std::string path_;
  std::size_t line_;
  std::string message_;
};

/// Model file written by an incompatible format version.
class VersionError : public FormatError {
 public:
  VersionError(std::string path, int expected, int found)
      : FormatError(std::move(path), 0,
                    "unsupported model format version: expected " +
                        std::to_string(expected) + ", found " +
                        std::to_string(found)),
        expected_(expected),
        found_(found) {}

  int expected() const noexcept { return expected_; }
  int found() const noexcept { return found_; }

 private:
  int expected_;
  int found_;
};

/// Training diverged (non-finite loss or parameters).
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wheelflat
