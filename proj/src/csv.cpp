#include "tbf/csv.hpp"

#include <charconv>
#include <cmath>

#include "tbf/types.hpp"

namespace tbf {

namespace {

std::string field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void append_row(std::string& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    out += field(row[i]);
  }
  out += '\n';
}

}  // namespace

std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string csv_number(std::int64_t x) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string csv_number(std::size_t x) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw DimensionError("CSV row width does not match the header");
  rows.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  append_row(out, columns);
  for (const auto& r : rows) append_row(out, r);
  return out;
}

}  // namespace tbf
