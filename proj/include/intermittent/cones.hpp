#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "intermittent/discretization.hpp"
#include "intermittent/map_family.hpp"
#include "intermittent/transfer_op.hpp"

namespace intermittent {

struct ConeParams {
  double a1 = 1, b1 = 1, a2 = 1, b2 = 1, a3 = 1, b3 = 1;
  /// Lower-bound constant of the second cone.
  double gamma = 0.0;
  double delta = 0.05;

  void validate() const;
  /// min{a2,b2}/max{a1,b1}, min{a3,b3}/max{a1,b1}, min{a3,b3}/max{a2,b2}.
  std::array<double, 3> ratios() const;
  /// delta^{a1} / (2 e^{b1 (1 - delta)}): lower bound of phi / m(phi) away
  /// from the neutral point for members of the first cone.
  double floor_constant(double at_delta) const;
};

enum class ConeKind { kStar1, kStar2, kHigher };
enum class ConeOperator { kL, kN1, kNd };

std::string to_string(ConeKind k);
std::string to_string(ConeOperator op);

/// Values of a function and its first three derivatives at a point.
using Jet = std::array<double, 4>;

/// Smooth function on the circle minus the neutral point, given with derivatives.
struct ConeFunction {
  std::function<Jet(double)> eval;
  std::string label;
  /// Optional cheaper evaluation of the value alone.
  std::function<double(double)> value_only;

  double operator()(double x) const { return value_only ? value_only(x) : eval(x)[0]; }
};

ConeFunction constant_function(double c);
/// c * (x^{-alpha} + (1 - x)^{-alpha}), a smooth model of the density singularity.
ConeFunction singular_profile(double alpha, double c);
/// amplitude * exp(-1 / (1 - t^2)), t = (x - center) / radius, zero outside.
ConeFunction mollified_bump(double center, double radius, double amplitude);
/// Pointwise sum.
ConeFunction operator+(const ConeFunction& a, const ConeFunction& b);
/// Piecewise-linear interpolation of cell averages through cell centers,
/// with the slope of each segment as derivative and zero higher derivatives.
ConeFunction interpolate_density(const GridDensity& h);

/// Pointwise image under L, N_1 or N_d. The third derivative of the image is
/// a centered difference of its analytic second derivative.
ConeFunction apply_operator(const CircleMapFamily& map, ConeOperator op, const ConeFunction& phi);

/// Distance to the neutral point 0 ~ 1.
inline double circle_abs(double x) { return x < 0.5 ? x : 1.0 - x; }

/// Sample points: log-spaced in distance to the neutral point on both sides,
/// from the right edge of the second cell (the two cells nearest each
/// neutral point are excluded) up to 1/2.
std::vector<double> cone_samples(const NonuniformGrid& grid, int per_side = 400);

struct ConeVerdict {
  bool member = false;
  double margin = 0.0;
  /// Condition responsible for the worst margin and where it occurred.
  std::string worst_condition;
  double worst_x = 0.0;
  double mass = 0.0;
};

/// Membership test with margins normalized to be >= 0 for members:
///   positivity         phi / (h m(phi))
///   upper bound        2 - phi / (h m(phi))            (first and second cone)
///   derivative k       1 - |phi^(k)| / ((a_k/|x|^k + b_k) phi)
///   lower bound        phi / (gamma m(phi)) - 1 on |x| <= delta   (second cone)
/// The mass m(phi) is integrated cell by cell on h's grid.
ConeVerdict cone_membership(const ConeFunction& phi, ConeKind kind, const ConeParams& cp,
                            const GridDensity& h, const std::vector<double>& samples,
                            double tolerance = 1e-8);

/// First-cone test (value and first derivative conditions).
ConeVerdict in_cone_star1(const ConeFunction& phi, const ConeParams& cp, const GridDensity& h,
                          const std::vector<double>& samples, double tolerance = 1e-8);

/// Positive combination c0 + c_h singular_profile + bumps; deterministic given (seed, id).
ConeFunction random_trial(double alpha, std::uint64_t seed, int id);

struct ConeTrialRow {
  int trial_id = 0;
  ConeKind cone = ConeKind::kStar1;
  ConeOperator op = ConeOperator::kL;
  /// Margin of the image.
  double margin = 0.0;
  bool pass = false;
};

struct HarnessReport {
  std::vector<ConeTrialRow> rows;
  int admitted = 0;
  int passed = 0;
  double pass_rate = 0.0;
  /// Smallest power-of-two factor s such that all images lie in the cone
  /// with every (a_k, b_k) multiplied by s (infinite if none up to 2^20).
  double inflation = 1.0;
  /// min over admitted trials of m(op phi) / m(phi).
  double min_mass_ratio = 0.0;
};

/// Draws random trials until `trials` of them lie in the cone (trial 0 is
/// the constant 1), applies the operator and re-tests membership.
HarnessReport invariance_harness(const CircleMapFamily& map, const GridDensity& h, ConeOperator op,
                                 ConeKind cone, const ConeParams& cp, int trials,
                                 std::uint64_t seed);

struct Calibration {
  ConeParams params;
  int rounds = 0;
  bool success = false;
};

/// Doubling search from (1,1) for each derivative order: (a_k, b_k) is
/// doubled (a_k when the worst violation is within delta of the neutral
/// point, b_k otherwise) until every admitted trial stays in the cone under L.
Calibration calibrate_cone(const CircleMapFamily& map, const GridDensity& h, ConeKind cone,
                           int trials, std::uint64_t seed, const ConeParams& start = {},
                           int max_rounds = 40);

struct FloorReport {
  int checked = 0;
  /// min over checked functions and samples with |x| >= delta of phi(x) / m(phi).
  double min_ratio = 0.0;
  double floor = 0.0;
  bool pass = false;
};

/// Lower bound phi >= floor_constant(delta) m(phi) off B_delta(0), checked on
/// the admitted first-cone trials and on their images under L.
FloorReport floor_check(const CircleMapFamily& map, const GridDensity& h, const ConeParams& cp,
                        int trials, std::uint64_t seed, double delta);

/// min over cells and n = 1..n_max of the Ulam iterates L^n 1.
double min_iterate_of_constant(const UlamMatrix& L, int n_max);

void write_cone_csv(std::ostream& os, const HarnessReport& r);

}  // namespace intermittent
