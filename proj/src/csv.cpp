#include "wheelflat/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "wheelflat/errors.hpp"

namespace wheelflat::csv {

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("to_chars failed");
  return std::string(buf, end);
}

void write_row(std::ostream& out, std::span<const double> values) {
  char buf[64];
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out.put(',');
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), values[i]);
    out.write(buf, end - buf);
  }
  out.put('\n');
}

Reader::Reader(std::istream& in, std::string source_name)
    : in_(in), source_(std::move(source_name)) {}

std::vector<std::string> Reader::header() {
  std::vector<std::string_view> cells;
  if (!next(cells)) fail("empty file, expected a header row");
  return {cells.begin(), cells.end()};
}

bool Reader::next(std::vector<std::string_view>& cells) {
  cells.clear();
  while (std::getline(in_, buffer_)) {
    ++line_;
    if (!buffer_.empty() && buffer_.back() == '\r') buffer_.pop_back();
    if (buffer_.empty()) continue;
    std::string_view rest(buffer_);
    for (;;) {
      const auto comma = rest.find(',');
      cells.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    return true;
  }
  return false;
}

double Reader::parse_double(std::string_view cell) const {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    fail("invalid number '" + std::string(cell) + "'");
  }
  if (!std::isfinite(value)) fail("non-finite value '" + std::string(cell) + "'");
  return value;
}

void Reader::fail(const std::string& message) const {
  throw FormatError(source_, line_, message);
}

}  // namespace wheelflat::csv
