#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "intermittent/discretization.hpp"
#include "intermittent/transfer_op.hpp"

namespace intermittent {

/// |int psi L^n phi dx| for n = 1..n_max. `phi` must have zero mass.
std::vector<double> correlation_sequence(const UlamMatrix& L, const GridDensity& phi,
                                         const PointFunction& psi, int n_max);

struct DecayFit {
  double alpha = 0.0;
  std::vector<int> n;
  std::vector<double> correlation;
  /// Slope of log|corr| against log n.
  double exponent = 0.0;
  /// Coefficient of log log n when the correction term is fitted.
  double loglog_coefficient = 0.0;
  bool with_loglog = false;
  int window_lo = 0;
  int window_hi = 0;
  /// Root mean square residual of the power-law fit (log scale).
  double residual = 0.0;
  /// Same for log|corr| against n (geometric model).
  double geometric_residual = 0.0;
  double geometric_rate = 0.0;
  bool geometric_preferred = false;
};

/// Least-squares fit of log|corr_n| = c + p log n (+ q log log n) over
/// window_lo <= n <= window_hi; seq[k] is the value at n = k + 1. Entries
/// with n < 10 or magnitude <= noise_floor are dropped. Throws
/// std::invalid_argument when fewer than 10 points remain.
DecayFit fit_decay(const std::vector<double>& seq, int window_lo, int window_hi,
                   bool with_loglog = false, double noise_floor = 0.0);

/// CSV with header n,correlation.
void write_correlation_csv(std::ostream& os, const std::vector<double>& seq);

}  // namespace intermittent
