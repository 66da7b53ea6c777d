#pragma once

#include <iosfwd>
#include <string>
#include <vector>

// CSV dialect shared by every artifact: comma separated, one header row,
// LF line endings, reals printed with %.17g.
namespace intermittent::csv {

/// %.17g, which round-trips every finite double.
std::string num(double x);

/// Reads a numeric CSV whose header must equal `header`.
std::vector<std::vector<double>> read(std::istream& is, const std::vector<std::string>& header);

/// Splits a line on commas (no quoting).
std::vector<std::string> split(const std::string& line);

}  // namespace intermittent::csv
