#include "intermittent/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <stdexcept>

namespace intermittent::csv {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::vector<double>> read(std::istream& is, const std::vector<std::string>& header) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("empty CSV");
  if (split(line) != header) throw std::invalid_argument("unexpected CSV header: " + line);
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument("CSV line " + std::to_string(lineno) + " has wrong arity");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (end == c.c_str() || *end != '\0') {
        throw std::invalid_argument("CSV line " + std::to_string(lineno) + ": bad number '" + c + "'");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace intermittent::csv
