#include "am2r/csv.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace am2r {

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_int(long long v) { return std::to_string(v); }

double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("bad numeric cell: '" + s + "'");
  return v;
}

namespace {

void check_cell(const std::string& c) {
  if (c.find(',') != std::string::npos || c.find('\n') != std::string::npos)
    throw std::invalid_argument("table cell may not contain ',' or newline");
}

}  // namespace

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {
  for (const auto& c : columns_) check_cell(c);
}

void Table::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size())
    throw std::invalid_argument("row width does not match header");
  for (const auto& c : cells) check_cell(c);
  rows_.push_back(std::move(cells));
}

int Table::col_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i] == name) return static_cast<int>(i);
  return -1;
}

const std::string& Table::cell(std::size_t row, const std::string& col) const {
  const int c = col_index(col);
  if (c < 0) throw std::out_of_range("no column '" + col + "'");
  return rows_.at(row).at(static_cast<std::size_t>(c));
}

double Table::num(std::size_t row, const std::string& col) const {
  return parse_double(cell(row, col));
}

void Table::write(std::ostream& os) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    os << columns_[i] << (i + 1 < columns_.size() ? ',' : '\n');
  for (const auto& row : rows_)
    for (std::size_t i = 0; i < row.size(); ++i)
      os << row[i] << (i + 1 < row.size() ? ',' : '\n');
}

void Table::write_file(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write(os);
}

Table Table::read(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("csv: missing header");
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
      if (ch == ',') {
        out.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur.push_back(ch);
      }
    }
    out.push_back(cur);
    return out;
  };
  Table t(split(line));
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    t.add_row(split(line));
  }
  return t;
}

Table Table::read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read(is);
}

}  // namespace am2r
