#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wheelflat::csv {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

void write_row(std::ostream& out, std::span<const double> values);

/// Line-oriented CSV reader for numeric tables. Errors are reported as
/// FormatError with the file name and line number.
class Reader {
 public:
  Reader(std::istream& in, std::string source_name);

  /// Reads the header row. Throws if the file is empty.
  std::vector<std::string> header();

  /// Reads the next row into `cells` (split on ','). Returns false at EOF.
  bool next(std::vector<std::string_view>& cells);

  double parse_double(std::string_view cell) const;

  std::size_t line() const noexcept { return line_; }
  const std::string& source() const noexcept { return source_; }
  [[noreturn]] void fail(const std::string& message) const;

 private:
  std::istream& in_;
  std::string source_;
  std::string buffer_;
  std::size_t line_ = 0;
};

}  // namespace wheelflat::csv
