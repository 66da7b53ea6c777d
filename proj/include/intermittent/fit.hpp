#pragma once

#include <vector>

namespace intermittent {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Residual sum of squares.
  double rss = 0.0;
};

/// Ordinary least-squares line through (x, y).
LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace intermittent
