#include "dissem/cli/csv.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace dissem::cli {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // folds -0
  return fmt::format("{:.10g}", v);
}

std::string format_number(std::optional<double> v) { return v ? format_number(*v) : std::string{}; }

std::string escape_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out += '"';
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::add_row(std::vector<std::string> fields) {
  if (fields.size() != columns_.size())
    throw std::invalid_argument(
        fmt::format("row has {} fields, table has {} columns", fields.size(), columns_.size()));
  rows_.push_back(std::move(fields));
}

namespace {

void write_line(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape_field(fields[i]);
  }
  out << '\n';
}

}  // namespace

void CsvTable::write(std::ostream& out) const {
  write_line(out, columns_);
  for (const auto& r : rows_) write_line(out, r);
}

std::string CsvTable::str() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

}  // namespace dissem::cli
