#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace dissem::cli {

// Shortest round-trippable-enough decimal with '.' separator ("{:.10g}").
std::string format_number(double v);
std::string format_number(std::optional<double> v);  // empty when absent

// RFC 4180 quoting: fields containing , " CR or LF are wrapped in quotes.
std::string escape_field(std::string_view field);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  // Throws std::invalid_argument when the width does not match the columns.
  void add_row(std::vector<std::string> fields);

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const { return rows_.size(); }

  // Column line then one line per row, LF terminated.
  void write(std::ostream& out) const;
  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace dissem::cli
