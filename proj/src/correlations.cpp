#include "intermittent/correlations.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "intermittent/csv.hpp"

namespace intermittent {

std::vector<double> correlation_sequence(const UlamMatrix& L, const GridDensity& phi,
                                         const PointFunction& psi, int n_max) {
  if (!(phi.grid() == L.grid())) throw std::invalid_argument("correlation_sequence: grid mismatch");
  if (std::abs(phi.mass()) > 1e-8 * std::max(1.0, phi.l1_norm())) {
    throw std::invalid_argument("correlation_sequence: phi must have zero mass");
  }
  const auto ints = cell_integrals(psi, L.grid());
  std::vector<double> cur = phi.values(), next, scratch;
  std::vector<double> out;
  out.reserve(n_max);
  for (int n = 1; n <= n_max; ++n) {
    L.apply_values(cur, next, scratch);
    cur.swap(next);
    out.push_back(std::abs(pair(cur, ints)));
  }
  return out;
}

namespace {

/// Ordinary least squares; returns coefficients and the residual RMS.
std::pair<Eigen::VectorXd, double> ols(const Eigen::MatrixXd& A, const Eigen::VectorXd& y) {
  Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
  const double rms = std::sqrt((A * c - y).squaredNorm() / static_cast<double>(y.size()));
  return {c, rms};
}

}  // namespace

DecayFit fit_decay(const std::vector<double>& seq, int window_lo, int window_hi, bool with_loglog,
                   double noise_floor) {
  DecayFit fit;
  fit.window_lo = std::max(window_lo, 10);
  fit.window_hi = std::min<int>(window_hi, static_cast<int>(seq.size()));
  fit.with_loglog = with_loglog;
  for (int n = fit.window_lo; n <= fit.window_hi; ++n) {
    const double c = seq[n - 1];
    if (c > noise_floor && c > 0.0 && std::isfinite(c)) {
      fit.n.push_back(n);
      fit.correlation.push_back(c);
    }
  }
  const int k = static_cast<int>(fit.n.size());
  if (k < 10) throw std::invalid_argument("fit_decay: fewer than 10 usable points");

  const int cols = with_loglog ? 3 : 2;
  Eigen::MatrixXd A(k, cols), G(k, 2);
  Eigen::VectorXd y(k);
  for (int r = 0; r < k; ++r) {
    const double ln = std::log(static_cast<double>(fit.n[r]));
    A(r, 0) = 1.0;
    A(r, 1) = ln;
    if (with_loglog) A(r, 2) = std::log(ln);
    G(r, 0) = 1.0;
    G(r, 1) = fit.n[r];
    y[r] = std::log(fit.correlation[r]);
  }
  const auto [c, rms] = ols(A, y);
  fit.exponent = c[1];
  if (with_loglog) fit.loglog_coefficient = c[2];
  fit.residual = rms;
  const auto [g, grms] = ols(G, y);
  fit.geometric_rate = std::exp(g[1]);
  fit.geometric_residual = grms;
  fit.geometric_preferred = grms < rms;
  return fit;
}

void write_correlation_csv(std::ostream& os, const std::vector<double>& seq) {
  os << "n,correlation\n";
  for (std::size_t k = 0; k < seq.size(); ++k) os << k + 1 << ',' << csv::num(seq[k]) << '\n';
}

}  // namespace intermittent
