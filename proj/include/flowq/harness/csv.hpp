#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace flowq::harness {

// %.17g; non-finite values print as nan, inf, -inf.
std::string format_number(double v);

using Cell = std::variant<std::monostate, double, std::int64_t, std::uint64_t, std::string>;

std::string format_cell(const Cell& c);

// Fixed column order set at construction.
class CsvTable {
 public:
  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> header);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  const std::vector<Cell>& row(std::size_t i) const { return rows_[i]; }

  // Throws InvalidArgument when the width does not match the header.
  void add_row(std::vector<Cell> cells);

  void write(std::ostream& out) const;
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

}  // namespace flowq::harness
