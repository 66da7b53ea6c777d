#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "intermittent/discretization.hpp"
#include "intermittent/map_family.hpp"
#include "intermittent/transfer_op.hpp"

namespace intermittent {

/// Point of the solid torus: circle coordinate x and fiber point (y, z) in the unit disk.
struct SolenoidState {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// F(x, y, z) = (f(x), cos(2 pi x)/2 + y/5, sin(2 pi x)/2 + z/5).
SolenoidState solenoid_step(const CircleMapFamily& map, const SolenoidState& s);

/// Projection to the base circle.
inline double project_base(const SolenoidState& s) { return s.x; }

using TorusObservable = std::function<double(const SolenoidState&)>;

struct NamedTorusObservable {
  std::string id;
  TorusObservable fn;
  /// Lipschitz constant in the fiber variables (used for the envelope bound).
  double fiber_lipschitz = 0.0;

  /// psi(x) with psi = cos 2 pi x.
  static NamedTorusObservable base_cos();
  /// The fiber coordinate y.
  static NamedTorusObservable fiber_y();
  static NamedTorusObservable one();
};

struct BirkhoffConfig {
  long orbit_length = 10'000'000;
  long burn_in = 10'000;
  /// Independent orbits whose sums are combined; each gets orbit_length / streams steps.
  int streams = 8;
  int workers = 1;
  /// Batches per stream for the batch-means standard error.
  int batches = 50;
  std::uint64_t seed = 1;
};

struct BirkhoffResult {
  std::vector<double> mean;
  std::vector<double> std_error;
  long samples = 0;
};

/// Birkhoff averages of several observables along the same orbits. Initial
/// points are uniform in the torus, drawn from the counter-based generator
/// keyed by (seed, stream). Per-stream sums are reduced pairwise in a fixed
/// order, so results do not depend on the worker count.
BirkhoffResult birkhoff_average(const CircleMapFamily& map,
                                const std::vector<NamedTorusObservable>& observables,
                                const BirkhoffConfig& cfg);

struct LiftConfig {
  int x_bins = 256;
  /// Base points per bin (stratified in the quantiles of mu). For large
  /// k_depth the integrand oscillates on scales far below a bin, so the
  /// estimate behaves like plain Monte Carlo in x_bins * x_per_bin points.
  int x_per_bin = 64;
  int n_fiber = 64;
  int k_depth = 12;
  std::uint64_t seed = 1;
};

struct FiberEnvelope {
  int bin = 0;
  double phi_sup = 0.0;
  double phi_inf = 0.0;
  int count = 0;
};

struct LiftResult {
  double upper = 0.0;  ///< mean of (phi o F^k)^+ under mu
  double lower = 0.0;  ///< mean of (phi o F^k)^- under mu
  double estimate = 0.0;
  /// Stratified standard error of the estimate.
  double std_error = 0.0;
  /// Largest sup - inf over a single base point, maximized over bins.
  double envelope_gap = 0.0;
  /// fiber_lipschitz * 2 * 5^{-k_depth}.
  double envelope_bound = 0.0;
  std::vector<FiberEnvelope> envelopes;
};

/// The lift int (phi o F^k)^{+-} d mu with mu = h dx given as cell averages.
/// The sup and inf over each fiber are taken over n_fiber sampled disk points.
LiftResult lift_expectation(const CircleMapFamily& map, const GridDensity& h,
                            const NamedTorusObservable& phi, const LiftConfig& cfg);

struct SrbEstimate {
  double birkhoff = 0.0;
  double birkhoff_se = 0.0;
  LiftResult lift;
  bool density_converged = false;
};

SrbEstimate srb_expectation(const CircleMapFamily& map, const GridPtr& grid,
                            const NamedTorusObservable& phi, const BirkhoffConfig& bcfg,
                            const LiftConfig& lcfg);

struct StabilityRow {
  double alpha = 0.0;
  std::string phi_id;
  double expectation = 0.0;
  double std_error = 0.0;
  /// |E(alpha) - E(alpha0)|; zero on the reference row.
  double gap = 0.0;
};

struct StabilityTable {
  double alpha0 = 0.0;
  std::vector<StabilityRow> rows;
  /// Per observable: gap at the closest alpha below the gap at the farthest,
  /// and gaps non-increasing along the sequence up to 2 combined standard errors.
  std::vector<std::string> phi_ids;
  std::vector<bool> closest_below_farthest;
  std::vector<bool> decreasing;
};

/// Birkhoff averages at alpha0 and each alpha_n with common random initial
/// points, and the gaps to alpha0. `family` supplies the map at each alpha.
StabilityTable stability_experiment(const CircleMapFamily& family,
                                    const std::vector<double>& alphas, double alpha0,
                                    const std::vector<NamedTorusObservable>& observables,
                                    const BirkhoffConfig& cfg);

struct SolenoidInvariants {
  /// max | d(F s, F s') / d(s, s') - 1/5 | over random pairs sharing x.
  double contraction_error = 0.0;
  /// Steps where pi(F s) and f(pi s) differ in any bit.
  long semiconjugacy_mismatches = 0;
  /// Largest fiber radius sqrt(y^2 + z^2) along the orbit.
  double max_fiber_radius = 0.0;
  int pairs = 0;
  long orbit_steps = 0;
};

SolenoidInvariants check_invariants(const CircleMapFamily& map, int pairs, long orbit_steps,
                                    std::uint64_t seed);

/// Pairwise (tree) summation in a fixed order.
double pairwise_sum(const std::vector<double>& v);

void write_stability_csv(std::ostream& os, const StabilityTable& t);
/// CSV header step,x,y,z.
void write_orbit_csv(std::ostream& os, const CircleMapFamily& map, SolenoidState s, long steps,
                     long every);

}  // namespace intermittent
