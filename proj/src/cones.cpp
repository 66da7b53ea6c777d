#include "intermittent/cones.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "intermittent/csv.hpp"
#include "intermittent/rng.hpp"

namespace intermittent {

void ConeParams::validate() const {
  for (double c : {a1, b1, a2, b2, a3, b3}) {
    if (!(c > 0.0)) throw std::invalid_argument("cone constants must be positive");
  }
  if (gamma < 0.0) throw std::invalid_argument("cone gamma must be nonnegative");
  if (!(delta > 0.0 && delta < 0.5)) throw std::invalid_argument("cone delta must lie in (0,1/2)");
}

std::array<double, 3> ConeParams::ratios() const {
  return {std::min(a2, b2) / std::max(a1, b1), std::min(a3, b3) / std::max(a1, b1),
          std::min(a3, b3) / std::max(a2, b2)};
}

double ConeParams::floor_constant(double at_delta) const {
  return std::pow(at_delta, a1) / (2.0 * std::exp(b1 * (1.0 - at_delta)));
}

std::string to_string(ConeKind k) {
  switch (k) {
    case ConeKind::kStar1: return "C*1";
    case ConeKind::kStar2: return "C*2";
    case ConeKind::kHigher: return "C";
  }
  return "?";
}

std::string to_string(ConeOperator op) {
  switch (op) {
    case ConeOperator::kL: return "L";
    case ConeOperator::kN1: return "N1";
    case ConeOperator::kNd: return "Nd";
  }
  return "?";
}

ConeFunction constant_function(double c) {
  return {[c](double) { return Jet{c, 0.0, 0.0, 0.0}; }, "const", {}};
}

ConeFunction singular_profile(double alpha, double c) {
  return {[alpha, c](double x) {
            const double y = 1.0 - x;
            Jet j{};
            double kx = 1.0, ky = 1.0;  // falling factorial coefficients
            for (int k = 0; k < 4; ++k) {
              // d^k/dx^k x^{-a} = kx x^{-a-k}; d^k/dx^k (1-x)^{-a} = ky (1-x)^{-a-k}
              j[k] = c * (kx * std::pow(x, -alpha - k) + ky * std::pow(y, -alpha - k));
              kx *= -(alpha + k);
              ky *= (alpha + k);
            }
            return j;
          },
          "profile", {}};
}

ConeFunction mollified_bump(double center, double radius, double amplitude) {
  return {[=](double x) {
            const double t = (x - center) / radius;
            if (std::abs(t) >= 1.0) return Jet{0.0, 0.0, 0.0, 0.0};
            const double q = 1.0 - t * t;
            const double b = amplitude * std::exp(-1.0 / q);
            // b = exp(E), E = -1/q.
            const double e1 = -2.0 * t / (q * q);
            const double e2 = -2.0 / (q * q) - 8.0 * t * t / (q * q * q);
            const double e3 = -24.0 * t / (q * q * q) - 48.0 * t * t * t / (q * q * q * q);
            return Jet{b, b * e1 / radius, b * (e2 + e1 * e1) / (radius * radius),
                       b * (e3 + 3.0 * e1 * e2 + e1 * e1 * e1) / (radius * radius * radius)};
          },
          "bump", {}};
}

ConeFunction operator+(const ConeFunction& a, const ConeFunction& b) {
  return {[fa = a.eval, fb = b.eval](double x) {
            const Jet p = fa(x), q = fb(x);
            return Jet{p[0] + q[0], p[1] + q[1], p[2] + q[2], p[3] + q[3]};
          },
          a.label + "+" + b.label, [a, b](double x) { return a(x) + b(x); }};
}

ConeFunction interpolate_density(const GridDensity& h) {
  return {[h](double x) {
            const auto& g = h.grid();
            const int m = g.size();
            int k = g.locate(x);
            if (x < g.center(k)) --k;
            if (k < 0) return Jet{h[0], 0.0, 0.0, 0.0};
            if (k >= m - 1) return Jet{h[m - 1], 0.0, 0.0, 0.0};
            const double c0 = g.center(k), c1 = g.center(k + 1);
            const double slope = (h[k + 1] - h[k]) / (c1 - c0);
            return Jet{h[k] + slope * (x - c0), slope, 0.0, 0.0};
          },
          "density", {}};
}

namespace {

std::vector<int> operator_branches(const CircleMapFamily& map, ConeOperator op) {
  switch (op) {
    case ConeOperator::kL: {
      std::vector<int> all(map.branch_count());
      for (int b = 0; b < map.branch_count(); ++b) all[b] = b + 1;
      return all;
    }
    case ConeOperator::kN1: return {1};
    case ConeOperator::kNd: return {map.branch_count()};
  }
  return {};
}

/// Value and first two derivatives of sum_i g_i' phi(g_i) at x.
std::array<double, 3> image_upto2(const CircleMapFamily& map, const std::vector<int>& branches,
                                  const std::function<Jet(double)>& phi, double x) {
  std::array<double, 3> r{0, 0, 0};
  for (int b : branches) {
    const double u = map.inverse(BranchId{b}, x);
    const double f1 = map.branch_deriv(b, u, 1);
    const double f2 = map.branch_deriv(b, u, 2);
    const double f3 = map.branch_deriv(b, u, 3);
    const double g1 = 1.0 / f1;
    const double g2 = -f2 * g1 * g1 * g1;
    const double g3 = -f3 * g1 * g1 * g1 * g1 + 3.0 * f2 * f2 * g1 * g1 * g1 * g1 * g1;
    const Jet p = phi(u);
    r[0] += g1 * p[0];
    r[1] += g2 * p[0] + g1 * g1 * p[1];
    r[2] += g3 * p[0] + 3.0 * g1 * g2 * p[1] + g1 * g1 * g1 * p[2];
  }
  return r;
}

}  // namespace

ConeFunction apply_operator(const CircleMapFamily& map, ConeOperator op, const ConeFunction& phi) {
  auto m = map.with_alpha(map.alpha());
  std::shared_ptr<const CircleMapFamily> owned(std::move(m));
  const auto branches = operator_branches(map, op);
  return {[owned, branches, f = phi.eval](double x) {
            const auto r = image_upto2(*owned, branches, f, x);
            const double step = 1e-4 * circle_abs(x);
            const auto rp = image_upto2(*owned, branches, f, x + step);
            const auto rm = image_upto2(*owned, branches, f, x - step);
            return Jet{r[0], r[1], r[2], (rp[2] - rm[2]) / (2.0 * step)};
          },
          to_string(op) + "(" + phi.label + ")",
          [owned, branches, f = phi](double x) {
            double r = 0.0;
            for (int b : branches) {
              const double u = owned->inverse(BranchId{b}, x);
              r += f(u) / owned->branch_deriv(b, u, 1);
            }
            return r;
          }};
}

std::vector<double> cone_samples(const NonuniformGrid& grid, int per_side) {
  const double lo = grid.right(1);
  const double hi = 0.5;
  std::vector<double> xs;
  xs.reserve(2 * per_side);
  for (int k = 0; k < per_side; ++k) {
    const double s = lo * std::pow(hi / lo, (k + 0.5) / per_side);
    xs.push_back(s);
    xs.push_back(1.0 - s);
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

namespace {

double cell_mass(const ConeFunction& phi, const NonuniformGrid& grid) {
  const PointFunction f = [&](double x) { return phi(x); };
  double sum = 0.0, comp = 0.0;
  for (int k = 0; k < grid.size(); ++k) {
    const double y = integrate_cell(f, grid.left(k), grid.right(k)) - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace

ConeVerdict cone_membership(const ConeFunction& phi, ConeKind kind, const ConeParams& cp,
                            const GridDensity& h, const std::vector<double>& samples,
                            double tolerance) {
  const auto& grid = h.grid();
  ConeVerdict v;
  v.mass = cell_mass(phi, grid);
  v.margin = std::numeric_limits<double>::infinity();
  auto note = [&](double margin, const char* what, double x) {
    if (margin < v.margin) {
      v.margin = margin;
      v.worst_condition = what;
      v.worst_x = x;
    }
  };
  if (!(v.mass > 0.0)) {
    note(-std::numeric_limits<double>::infinity(), "mass", 0.0);
    return v;
  }
  const int orders = kind == ConeKind::kHigher ? 3 : 1;
  const std::array<double, 3> a{cp.a1, cp.a2, cp.a3};
  const std::array<double, 3> b{cp.b1, cp.b2, cp.b3};
  for (double x : samples) {
    const Jet j = phi.eval(x);
    const double hx = h[grid.locate(x)];
    const double s = circle_abs(x);
    note(j[0] / (hx * v.mass), "positivity", x);
    if (kind != ConeKind::kHigher) note(2.0 - j[0] / (hx * v.mass), "upper", x);
    for (int k = 1; k <= orders; ++k) {
      const double bound = (a[k - 1] / std::pow(s, k) + b[k - 1]) * j[0];
      const double margin = bound > 0.0 ? 1.0 - std::abs(j[k]) / bound
                                         : (j[k] == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity());
      static constexpr const char* names[] = {"deriv1", "deriv2", "deriv3"};
      note(margin, names[k - 1], x);
    }
    if (kind == ConeKind::kStar2 && s <= cp.delta && cp.gamma > 0.0) {
      note(j[0] / (cp.gamma * v.mass) - 1.0, "lower", x);
    }
  }
  v.member = v.margin >= -tolerance;
  return v;
}

ConeVerdict in_cone_star1(const ConeFunction& phi, const ConeParams& cp, const GridDensity& h,
                          const std::vector<double>& samples, double tolerance) {
  return cone_membership(phi, ConeKind::kStar1, cp, h, samples, tolerance);
}

ConeFunction random_trial(double alpha, std::uint64_t seed, int id) {
  CounterRng rng(seed, static_cast<std::uint64_t>(id));
  const double c0 = rng.uniform(0.5, 1.5);
  ConeFunction phi = constant_function(c0);
  if (rng.uniform() < 0.5 && alpha > 0.0) phi = phi + singular_profile(alpha, rng.uniform(0.0, 0.5) * c0);
  const int bumps = static_cast<int>(rng.uniform() * 4.0);
  for (int k = 0; k < bumps; ++k) {
    const double center = rng.uniform(0.15, 0.85);
    const double radius = rng.uniform(0.05, 0.15);
    phi = phi + mollified_bump(center, radius, rng.uniform(0.0, 0.6) * c0);
  }
  phi.label = "trial" + std::to_string(id);
  return phi;
}

namespace {

ConeParams scaled(ConeParams cp, double s) {
  cp.a1 *= s;
  cp.b1 *= s;
  cp.a2 *= s;
  cp.b2 *= s;
  cp.a3 *= s;
  cp.b3 *= s;
  return cp;
}

struct Admitted {
  int id;
  ConeFunction phi;
  double mass;
};

std::vector<Admitted> admitted_trials(const CircleMapFamily& map, const GridDensity& h,
                                      ConeKind cone, const ConeParams& cp, int trials,
                                      std::uint64_t seed, const std::vector<double>& xs) {
  std::vector<Admitted> out;
  // Trial 0 is the constant function, always a member for a1, b1 > 0.
  for (int id = 0; static_cast<int>(out.size()) < trials && id < 20 * trials + 1; ++id) {
    ConeFunction phi = id == 0 ? constant_function(1.0) : random_trial(map.alpha(), seed, id);
    const auto v = cone_membership(phi, cone, cp, h, xs);
    if (v.member) out.push_back({id, std::move(phi), v.mass});
  }
  return out;
}

}  // namespace

HarnessReport invariance_harness(const CircleMapFamily& map, const GridDensity& h, ConeOperator op,
                                 ConeKind cone, const ConeParams& cp, int trials,
                                 std::uint64_t seed) {
  cp.validate();
  const auto xs = cone_samples(h.grid());
  const auto pool = admitted_trials(map, h, cone, cp, trials, seed, xs);
  HarnessReport rep;
  rep.min_mass_ratio = std::numeric_limits<double>::infinity();
  std::vector<ConeFunction> images;
  for (const auto& t : pool) {
    auto img = apply_operator(map, op, t.phi);
    const auto v = cone_membership(img, cone, cp, h, xs);
    rep.rows.push_back({t.id, cone, op, v.margin, v.member});
    rep.min_mass_ratio = std::min(rep.min_mass_ratio, v.mass / t.mass);
    ++rep.admitted;
    if (v.member) ++rep.passed;
    images.push_back(std::move(img));
  }
  rep.pass_rate = rep.admitted ? static_cast<double>(rep.passed) / rep.admitted : 0.0;

  rep.inflation = std::numeric_limits<double>::infinity();
  for (double s = 1.0; s <= 1048576.0; s *= 2.0) {
    const auto big = scaled(cp, s);
    bool all = true;
    for (const auto& img : images) {
      if (!cone_membership(img, cone, big, h, xs).member) {
        all = false;
        break;
      }
    }
    if (all) {
      rep.inflation = s;
      break;
    }
  }
  return rep;
}

FloorReport floor_check(const CircleMapFamily& map, const GridDensity& h, const ConeParams& cp,
                        int trials, std::uint64_t seed, double delta) {
  cp.validate();
  const auto xs = cone_samples(h.grid());
  std::vector<double> away;
  for (double x : xs) {
    if (circle_abs(x) >= delta) away.push_back(x);
  }
  away.push_back(delta);
  away.push_back(1.0 - delta);
  FloorReport rep;
  rep.floor = cp.floor_constant(delta);
  rep.min_ratio = std::numeric_limits<double>::infinity();
  auto check = [&](const ConeFunction& phi, double mass) {
    for (double x : away) rep.min_ratio = std::min(rep.min_ratio, phi(x) / mass);
    ++rep.checked;
  };
  for (const auto& t : admitted_trials(map, h, ConeKind::kStar1, cp, trials, seed, xs)) {
    check(t.phi, t.mass);
    const auto img = apply_operator(map, ConeOperator::kL, t.phi);
    const auto v = cone_membership(img, ConeKind::kStar1, cp, h, xs);
    check(img, v.mass);
  }
  rep.pass = rep.checked > 0 && rep.min_ratio >= rep.floor;
  return rep;
}

Calibration calibrate_cone(const CircleMapFamily& map, const GridDensity& h, ConeKind cone,
                           int trials, std::uint64_t seed, const ConeParams& start,
                           int max_rounds) {
  Calibration cal;
  cal.params = start;
  const auto xs = cone_samples(h.grid());
  const int orders = cone == ConeKind::kHigher ? 3 : 1;
  for (cal.rounds = 0; cal.rounds < max_rounds; ++cal.rounds) {
    if (cone == ConeKind::kStar2) cal.params.gamma = cal.params.floor_constant(cal.params.delta);
    const auto pool = admitted_trials(map, h, cone, cal.params, trials, seed, xs);
    // Worst failing image: which derivative order, and where.
    int worst_order = 0;
    double worst_margin = 0.0, worst_x = 0.5;
    for (const auto& t : pool) {
      const auto v = cone_membership(apply_operator(map, ConeOperator::kL, t.phi), cone,
                                     cal.params, h, xs);
      if (!v.member && v.margin < worst_margin) {
        worst_margin = v.margin;
        worst_x = v.worst_x;
        const auto& c = v.worst_condition;
        worst_order = c.rfind("deriv", 0) == 0 ? c.back() - '0' : -1;
      }
    }
    if (worst_margin == 0.0) {
      cal.success = true;
      return cal;
    }
    if (worst_order <= 0 || worst_order > orders) return cal;  // not fixable by scaling
    const bool near = circle_abs(worst_x) <= cal.params.delta;
    double& a = worst_order == 1 ? cal.params.a1 : worst_order == 2 ? cal.params.a2 : cal.params.a3;
    double& b = worst_order == 1 ? cal.params.b1 : worst_order == 2 ? cal.params.b2 : cal.params.b3;
    (near ? a : b) *= 2.0;
  }
  return cal;
}

double min_iterate_of_constant(const UlamMatrix& L, int n_max) {
  std::vector<double> cur(L.grid().size(), 1.0), next, scratch;
  double lo = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= n_max; ++n) {
    L.apply_values(cur, next, scratch);
    cur.swap(next);
    lo = std::min(lo, *std::min_element(cur.begin(), cur.end()));
  }
  return lo;
}

void write_cone_csv(std::ostream& os, const HarnessReport& r) {
  os << "trial_id,cone,operator,margin,pass\n";
  for (const auto& row : r.rows) {
    os << row.trial_id << ',' << to_string(row.cone) << ',' << to_string(row.op) << ','
       << csv::num(row.margin) << ',' << (row.pass ? 1 : 0) << '\n';
  }
}

}  // namespace intermittent
