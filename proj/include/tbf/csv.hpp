#pragma once

// Locale-independent CSV emission: ',' delimiter, '.' decimal point, '\n'.

#include <cstdint>
#include <string>
#include <vector>

namespace tbf {

/// Shortest round-trip representation.
std::string csv_number(double x);
std::string csv_number(std::int64_t x);
std::string csv_number(std::size_t x);

struct CsvTable {
  std::vector<std::string> columns;  // names carry units, e.g. "time_s"
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  std::string str() const;
};

}  // namespace tbf
