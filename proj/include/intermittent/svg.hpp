#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace intermittent {

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

/// Single-series line plot with axes and tick labels. Points with
/// non-finite coordinates, or non-positive ones on a log axis, are skipped.
void write_line_svg(std::ostream& os, const PlotSpec& spec, const std::vector<double>& xs,
                    const std::vector<double>& ys);

}  // namespace intermittent
