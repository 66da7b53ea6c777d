#include "intermittent/map_family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace intermittent {

MapParams MapParams::two_branch(double alpha) {
  MapParams p;
  p.alpha = alpha;
  return p;
}

void MapParams::validate() const {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in [0,1), got " + std::to_string(alpha));
  }
  if (d < 2) throw std::invalid_argument("branch count d must be >= 2");
  if (branch_endpoints.size() != static_cast<std::size_t>(d) + 1) {
    throw std::invalid_argument("branch_endpoints must hold d+1 values");
  }
  if (branch_endpoints.front() != 0.0 || branch_endpoints.back() != 1.0) {
    throw std::invalid_argument("branch_endpoints must start at 0 and end at 1");
  }
  for (std::size_t k = 1; k < branch_endpoints.size(); ++k) {
    if (!(branch_endpoints[k] > branch_endpoints[k - 1])) {
      throw std::invalid_argument("branch_endpoints must be strictly increasing");
    }
  }
}

CircleMapFamily::CircleMapFamily(MapParams params) : params_(std::move(params)) {
  params_.validate();
}

int CircleMapFamily::branch_of(double x) const {
  const auto& e = params_.branch_endpoints;
  const auto it = std::upper_bound(e.begin(), e.end(), x);
  const int b = static_cast<int>(it - e.begin());
  return std::clamp(b, 1, params_.d);
}

bool CircleMapFamily::is_breakpoint(double x) const {
  const auto& e = params_.branch_endpoints;
  return std::find(e.begin(), e.end(), x) != e.end();
}

double CircleMapFamily::f(double x) const {
  double y = branch_value(branch_of(x), x);
  if (y >= 1.0) y -= 1.0;
  if (y < 0.0) y = 0.0;
  return y;
}

double CircleMapFamily::deriv(double x, int order) const {
  if (order < 1 || order > 3) throw std::invalid_argument("derivative order must be 1, 2 or 3");
  if (order >= 2 && is_breakpoint(x) && params_.alpha > 0.0) {
    throw DomainError("f is not twice differentiable at branch endpoint " + std::to_string(x));
  }
  return branch_deriv(branch_of(x), x, order);
}

double CircleMapFamily::v(double x) const { return branch_dalpha(branch_of(x), x, 0); }

double CircleMapFamily::inverse(BranchId i, double y) const {
  if (i.index < 1 || i.index > params_.d) throw std::invalid_argument("branch index out of range");
  if (!(y >= 0.0 && y <= 1.0)) throw std::invalid_argument("inverse branch argument outside [0,1]");
  const int b = i.index;
  double lo = branch_left(b);
  double hi = branch_right(b);
  if (y == 0.0) return lo;
  if (y == 1.0) return hi;

  // Safeguarded Newton: keep a bracket [lo, hi] with F(lo) < y < F(hi) and
  // fall back to bisection whenever the Newton step leaves it.
  double x = lo + y * (hi - lo);
  for (int iter = 0; iter < kInverseMaxIterations; ++iter) {
    const double r = branch_value(b, x) - y;
    if (r == 0.0) return x;
    if (r > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    double next = x - r / branch_deriv(b, x, 1);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) {
      x = next;
      break;
    }
    const double step = std::abs(next - x);
    x = next;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) break;
  }
  const double residual = std::abs(branch_value(b, x) - y);
  if (residual > kInverseTolerance) {
    throw ConvergenceError("inverse branch " + std::to_string(b) + " failed at y=" +
                           std::to_string(y) + " (residual " + std::to_string(residual) + ")");
  }
  return x;
}

double CircleMapFamily::inverse_deriv(BranchId i, double x) const {
  const double u = inverse(i, x);
  return 1.0 / branch_deriv(i.index, u, 1);
}

double CircleMapFamily::X(BranchId i, double x, int order) const {
  if (!(x > 0.0 && x < 1.0)) {
    throw DomainError("X is singular at x = 0 on the circle");
  }
  if (order < 0 || order > 3) throw std::invalid_argument("X order must be 0..3");
  const int b = i.index;
  const double u = inverse(i, x);
  if (order == 0) return branch_dalpha(b, u, 0);

  const double f1 = branch_deriv(b, u, 1);
  const double v1 = branch_dalpha(b, u, 1);
  if (order == 1) return v1 / f1;

  const double f2 = branch_deriv(b, u, 2);
  const double v2 = branch_dalpha(b, u, 2);
  if (order == 2) return v2 / (f1 * f1) - v1 * f2 / (f1 * f1 * f1);

  const double f3 = branch_deriv(b, u, 3);
  const double v3 = branch_dalpha(b, u, 3);
  const double f1_2 = f1 * f1;
  const double f1_3 = f1_2 * f1;
  const double f1_4 = f1_3 * f1;
  return v3 / f1_3 - 3.0 * v2 * f2 / f1_4 - v1 * f3 / f1_4 + 3.0 * v1 * f2 * f2 / (f1_4 * f1);
}

double CircleMapFamily::dalpha_inverse(BranchId i, double x) const {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("d/dalpha g is singular at x = 0");
  const double u = inverse(i, x);
  return -branch_dalpha(i.index, u, 0) / branch_deriv(i.index, u, 1);
}

double CircleMapFamily::dalpha_X(BranchId i, double x) const {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("d/dalpha X is singular at x = 0");
  const int b = i.index;
  const double u = inverse(i, x);
  const double dg = -branch_dalpha(b, u, 0) / branch_deriv(b, u, 1);
  return branch_dalpha2(b, u) + branch_dalpha(b, u, 1) * dg;
}

// Two-branch family. Writing P(s) = s (2s)^alpha, branch 1 is x + P(x) and
// branch 2 is x - P(1 - x); all derivatives reduce to those of P and of
// V(s) = P(s) ln(2s).
namespace {

double pow_or_zero(double base, double expo) {
  // 0^negative arises only multiplied by a vanishing alpha factor.
  if (base == 0.0) return expo > 0.0 ? 0.0 : (expo == 0.0 ? 1.0 : 0.0);
  return std::pow(base, expo);
}

// k-th derivative of P at s >= 0.
double p_deriv(double alpha, double s, int k) {
  const double beta = alpha + 1.0;
  const double t = 2.0 * s;
  switch (k) {
    case 0:
      return s * pow_or_zero(t, alpha);
    case 1:
      return beta * pow_or_zero(t, alpha);
    case 2:
      if (alpha == 0.0) return 0.0;
      if (s == 0.0) return std::numeric_limits<double>::infinity();
      return 2.0 * beta * alpha * std::pow(t, alpha - 1.0);
    case 3:
      if (alpha == 0.0) return 0.0;
      if (s == 0.0) return -std::numeric_limits<double>::infinity();
      return 4.0 * beta * alpha * (alpha - 1.0) * std::pow(t, alpha - 2.0);
    default:
      throw std::invalid_argument("derivative order");
  }
}

// k-th derivative of V(s) = P(s) ln(2s); V(0) = 0 by continuity.
double v_deriv(double alpha, double s, int k) {
  const double beta = alpha + 1.0;
  const double t = 2.0 * s;
  if (s == 0.0) {
    if (k == 0) return 0.0;
    if (k == 1 && alpha > 0.0) return 0.0;
    throw DomainError("derivative of the perturbation field is singular at the fixed point");
  }
  const double L = std::log(t);
  switch (k) {
    case 0:
      return s * std::pow(t, alpha) * L;
    case 1:
      return std::pow(t, alpha) * (beta * L + 1.0);
    case 2:
      return 2.0 * std::pow(t, alpha - 1.0) * (alpha * (beta * L + 1.0) + beta);
    case 3:
      return 4.0 * std::pow(t, alpha - 2.0) *
             ((alpha - 1.0) * (alpha * (beta * L + 1.0) + beta) + beta * alpha);
    default:
      throw std::invalid_argument("derivative order");
  }
}

}  // namespace

TwoBranchIntermittentMap::TwoBranchIntermittentMap(double alpha)
    : CircleMapFamily(MapParams::two_branch(alpha)) {}

double TwoBranchIntermittentMap::branch_value(int branch, double x) const {
  if (branch == 1) return x + p_deriv(alpha(), x, 0);
  return x - p_deriv(alpha(), 1.0 - x, 0);
}

double TwoBranchIntermittentMap::branch_deriv(int branch, double x, int order) const {
  if (branch == 1) return (order == 1 ? 1.0 : 0.0) + p_deriv(alpha(), x, order);
  const double s = 1.0 - x;
  switch (order) {
    case 1:
      return 1.0 + p_deriv(alpha(), s, 1);
    case 2:
      return -p_deriv(alpha(), s, 2);
    case 3:
      return p_deriv(alpha(), s, 3);
    default:
      throw std::invalid_argument("derivative order");
  }
}

double TwoBranchIntermittentMap::branch_dalpha(int branch, double x, int order) const {
  if (branch == 1) return v_deriv(alpha(), x, order);
  // v_2(x) = -V(1 - x), so its k-th x-derivative is -(-1)^k V^{(k)}(1 - x).
  const double sign = (order % 2 == 0) ? -1.0 : 1.0;
  return sign * v_deriv(alpha(), 1.0 - x, order);
}

double TwoBranchIntermittentMap::branch_dalpha2(int branch, double x) const {
  const double s = branch == 1 ? x : 1.0 - x;
  if (s == 0.0) return 0.0;
  const double L = std::log(2.0 * s);
  const double val = p_deriv(alpha(), s, 0) * L * L;
  return branch == 1 ? val : -val;
}

std::unique_ptr<CircleMapFamily> TwoBranchIntermittentMap::with_alpha(double a) const {
  return std::make_unique<TwoBranchIntermittentMap>(a);
}

std::unique_ptr<CircleMapFamily> make_map(const MapParams& params) {
  params.validate();
  if (params.d != 2 || params.branch_endpoints[1] != 0.5) {
    throw std::invalid_argument("only the two-branch family with endpoint 1/2 is available");
  }
  return std::make_unique<TwoBranchIntermittentMap>(params.alpha);
}

PartitionSequences partition_sequences(const CircleMapFamily& map, int n_z, double z0) {
  if (n_z < 0) throw std::invalid_argument("N_z must be nonnegative");
  const int d = map.branch_count();
  if (z0 <= 0.0) z0 = map.inverse(BranchId{1}, map.branch_right(1));
  if (!(z0 < map.branch_right(1))) throw std::invalid_argument("z0 must lie in (0, e_1)");

  PartitionSequences out;
  out.z.reserve(n_z + 1);
  out.z_prime.reserve(n_z + 1);
  out.z.push_back(z0);
  out.z_prime.push_back(z0);
  double z = z0;
  double zp = 1.0 - z0;
  for (int n = 0; n < n_z; ++n) {
    z = map.inverse(BranchId{1}, z);
    out.z.push_back(z);
    if (map.reflection_symmetric()) {
      out.z_prime.push_back(z);
    } else {
      zp = map.inverse(BranchId{d}, zp);
      out.z_prime.push_back(1.0 - zp);
    }
  }
  return out;
}

double x_envelope_constant(const CircleMapFamily& map, BranchId i, int order, double x_lo,
                           double x_hi, int samples) {
  if (!(x_lo > 0.0 && x_hi > x_lo && x_hi <= 0.5)) {
    throw std::invalid_argument("envelope range must satisfy 0 < x_lo < x_hi <= 1/2");
  }
  const bool near_one = i.index == map.branch_count();
  const double a = map.alpha();
  double worst = 0.0;
  const double llo = std::log(x_lo);
  const double lhi = std::log(x_hi);
  for (int k = 0; k < samples; ++k) {
    const double s = std::exp(llo + (lhi - llo) * k / (samples - 1));
    const double x = near_one ? 1.0 - s : s;
    const double env = std::pow(s, a + 1.0 - order) * (1.0 + std::abs(std::log(s)));
    worst = std::max(worst, std::abs(map.X(i, x, order)) / env);
  }
  return worst;
}

}  // namespace intermittent
