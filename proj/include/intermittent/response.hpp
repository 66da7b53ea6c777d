#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "intermittent/discretization.hpp"
#include "intermittent/map_family.hpp"
#include "intermittent/transfer_op.hpp"

namespace intermittent {

/// How the cell averages of sum_i (X_i N_i h)' are formed.
enum class SourceScheme {
  /// Exact cell averages of the derivative from edge values of X_i N_i h,
  /// with N_i h(y) = g_i'(y) h(g_i(y)) read from the piecewise-constant h.
  /// Telescopes to zero total mass and equals minus the alpha-derivative of
  /// the Ulam operator applied to h.
  kFlux,
  /// X_i' (N_i h) + X_i (N_i h)' at cell centers, (N_i h)' by centered
  /// differences of the Ulam cell averages (one-sided next to 0 ~ 1).
  kProductRule,
};

/// Cell averages of sum over the neutral branches {1, d} of (X_i N_i h)'.
GridDensity source_term(const CircleMapFamily& map, const GridDensity& h,
                        SourceScheme scheme = SourceScheme::kFlux);

struct NeumannConfig {
  int j_max = 20000;
  /// Relative tail tolerance; the absolute floor is tol_tail_abs.
  double tol_tail_rel = 1e-5;
  double tol_tail_abs = 1e-8;
  /// Terms used by the power-law tail fit.
  int fit_window = 50;
};

struct NeumannResult {
  double value = 0.0;
  /// t_j = int psi L^j source, j = 0..J.
  std::vector<double> terms;
  std::vector<double> partial_sums;
  int J = 0;
  double tail_estimate = 0.0;
  /// Fitted exponent p of |t_j| ~ C j^p over the tail window.
  double tail_exponent = 0.0;
  bool converged = false;
  /// Set when the term magnitudes stop decreasing over the fit window.
  bool non_summable = false;
};

/// Partial sums of sum_j int psi L^j(source) dx, stopped once the fitted
/// tail bound drops below max(tol_tail_rel |sum|, tol_tail_abs).
/// `psi_integrals` holds the cell integrals of psi.
NeumannResult neumann_sum(const UlamMatrix& L, const GridDensity& source,
                          const std::vector<double>& psi_integrals, const NeumannConfig& cfg = {});

/// Estimated tail sum_{j > J} |t_j| from the last `window` magnitudes,
/// using the better of a power-law and a geometric least-squares fit.
struct TailFit {
  double power_exponent = 0.0;
  double power_residual = 0.0;
  double geometric_rate = 0.0;
  double geometric_residual = 0.0;
  bool geometric_preferred = false;
  double tail = 0.0;
};
TailFit fit_tail(const std::vector<double>& terms, int window);

/// Observable with a label used in reports.
struct Observable {
  std::string id;
  PointFunction fn;

  static Observable constant_one();
  static Observable cos2pi();
  /// psi(1 - x).
  Observable mirrored() const;
};

struct ResponseConfig {
  int m_total = 1 << 14;
  double refinement_ratio = 0.7;
  int n_geometric = 40;
  DensitySolverConfig density;
  NeumannConfig neumann;
  SourceScheme scheme = SourceScheme::kFlux;
  std::vector<double> fd_steps{1e-2, 5e-3, 2.5e-3};
  int workers = 1;
};

struct FdStep {
  double eps = 0.0;
  double quotient = 0.0;
};

struct FdResult {
  std::vector<FdStep> steps;
  double limit = 0.0;
  double uncertainty = 0.0;
  bool one_sided = false;
  /// A density at some alpha +- eps failed to converge.
  bool tainted = false;
};

struct ResponseReport {
  double alpha = 0.0;
  std::string psi_id;
  double formula_value = 0.0;
  NeumannResult neumann;
  FdResult fd;
  double source_mass = 0.0;
  double source_l1 = 0.0;
  std::string grid_meta;
};

/// Derivative of alpha -> int psi d mu_alpha from the resolvent formula.
/// Since d/dalpha L h = -sum_i (X_i N_i h)', the value is
/// -int psi (id - L)^{-1} [sum_i (X_i N_i h)'] dx, evaluated by the Neumann sum.
ResponseReport response_formula(const CircleMapFamily& map, const Observable& psi,
                                const ResponseConfig& cfg = {});
/// Same, on a prebuilt grid, with an already computed invariant density.
ResponseReport response_formula(const CircleMapFamily& map, const Observable& psi,
                                const UlamMatrix& L, const GridDensity& h,
                                const ResponseConfig& cfg);

/// int psi d mu_alpha for the Ulam invariant density at the map's alpha.
struct Expectation {
  double value = 0.0;
  bool converged = false;
};
Expectation expectation(const CircleMapFamily& map, const Observable& psi, const GridPtr& grid,
                        const DensitySolverConfig& cfg);

/// Difference quotients of alpha -> int psi d mu_alpha with Richardson
/// extrapolation on the two finest steps. Centered quotients unless
/// alpha == 0, which uses forward quotients.
FdResult fd_derivative(const CircleMapFamily& map, const Observable& psi,
                       const ResponseConfig& cfg = {});

/// Pointwise d^2/dalpha^2 L phi at x (diagnostic only): x-derivatives by
/// centered differences of the analytic pieces, phi given with its derivative.
double second_derivative_operator(const CircleMapFamily& map, const PointFunction& phi,
                                  const PointFunction& dphi, double x);
/// Pointwise d/dalpha L phi = -sum_i (X_i N_i phi)'(x).
double first_derivative_operator(const CircleMapFamily& map, const PointFunction& phi,
                                 const PointFunction& dphi, double x);

/// CSVs: j,term,partial_sum and step,quotient.
void write_neumann_csv(std::ostream& os, const NeumannResult& r);
void write_fd_csv(std::ostream& os, const FdResult& r);
/// Summary record with fields alpha, psi_id, formula_value, fd_limit,
/// fd_uncertainty, J, tail_estimate.
std::string response_summary_json(const ResponseReport& r);

}  // namespace intermittent
