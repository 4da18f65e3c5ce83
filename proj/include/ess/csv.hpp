#pragma once

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ess::csv {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline bool parse_double(const std::string& s, double& v) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return false;
  std::size_t b = s.find_last_not_of(" \t");
  const char* first = s.data() + a;
  const char* last = s.data() + b + 1;
  auto [ptr, ec] = std::from_chars(first, last, v);
  return ec == std::errc() && ptr == last;
}

/// Reads a numeric CSV table. A non-numeric first row is treated as a header
/// and skipped. Throws ParseError with the offending cell location.
inline std::vector<std::vector<double>> read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  bool first_data_line = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_line(line);
    std::vector<double> row(cells.size());
    bool ok = true;
    std::size_t bad_col = 0;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (!parse_double(cells[j], row[j])) {
        ok = false;
        bad_col = j;
        break;
      }
    }
    if (!ok) {
      if (first_data_line) {  // header row
        first_data_line = false;
        continue;
      }
      std::ostringstream msg;
      msg << path << ": non-numeric cell at row " << lineno << ", column "
          << (bad_col + 1) << " ('" << cells[bad_col] << "')";
      throw ParseError(msg.str());
    }
    first_data_line = false;
    if (!rows.empty() && row.size() != rows.front().size()) {
      std::ostringstream msg;
      msg << path << ": row " << lineno << " has " << row.size()
          << " columns, expected " << rows.front().size();
      throw ParseError(msg.str());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + ": empty file");
  return rows;
}

}  // namespace ess::csv
