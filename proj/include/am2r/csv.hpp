#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace am2r {

// Shortest round-trip formatting (17 significant digits only when needed) so
// equal doubles always serialize to the same bytes.
std::string format_double(double v);
std::string format_int(long long v);
double parse_double(const std::string& s);

// Header + string cells. Numeric cells are formatted on insertion, which
// makes emitted files byte-stable and exactly re-parseable.
class Table {
 public:
  explicit Table(std::vector<std::string> columns);

  void add_row(std::vector<std::string> cells);
  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t n_rows() const { return rows_.size(); }
  int col_index(const std::string& name) const;

  const std::string& cell(std::size_t row, const std::string& col) const;
  double num(std::size_t row, const std::string& col) const;

  void write(std::ostream& os) const;
  void write_file(const std::string& path) const;
  static Table read(std::istream& is);
  static Table read_file(const std::string& path);

  bool operator==(const Table& other) const {
    return columns_ == other.columns_ && rows_ == other.rows_;
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace am2r
