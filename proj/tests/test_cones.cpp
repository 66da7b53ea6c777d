#include <cmath>
#include <memory>

#include "doctest.h"
#include "intermittent/cones.hpp"

using namespace intermittent;

namespace {

struct Fixture {
  GridPtr g = std::make_shared<const NonuniformGrid>(NonuniformGrid::build(1024, 0.7, 30));
  TwoBranchIntermittentMap m{0.3};
  GridDensity h = invariant_density(m, g).density;
};

/// L phi(x) by bisection for the preimages, independent of the inverse solver.
double transfer(const CircleMapFamily& m, const ConeFunction& phi, double x) {
  double s = 0;
  for (int b = 1; b <= 2; ++b) {
    double lo = m.branch_left(b), hi = m.branch_right(b);
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (m.branch_value(b, mid) < x ? lo : hi) = mid;
    }
    s += phi(lo) / m.branch_deriv(b, lo, 1);
  }
  return s;
}

}  // namespace

TEST_CASE("floor constant formula") {
  ConeParams cp;
  cp.a1 = 2;
  cp.b1 = 3;
  CHECK(cp.floor_constant(0.1) == doctest::Approx(0.01 / (2 * std::exp(2.7))));
}

TEST_CASE("ratios and validation") {
  ConeParams cp;
  cp.a2 = 4;
  cp.b2 = 2;
  cp.a1 = 1;
  cp.b1 = 1;
  CHECK(cp.ratios()[0] == doctest::Approx(2.0));
  cp.a1 = -1;
  CHECK_THROWS(cp.validate());
}

TEST_CASE("pointwise operator images match bisection preimages") {
  TwoBranchIntermittentMap m(0.3);
  const auto phi = random_trial(0.3, 11, 4);
  const auto Lphi = apply_operator(m, ConeOperator::kL, phi);
  const auto N1 = apply_operator(m, ConeOperator::kN1, phi);
  const auto Nd = apply_operator(m, ConeOperator::kNd, phi);
  for (double x : {1e-4, 0.1, 0.4, 0.6, 0.9}) {
    CHECK(Lphi(x) == doctest::Approx(transfer(m, phi, x)).epsilon(1e-11));
    CHECK(N1(x) + Nd(x) == doctest::Approx(Lphi(x)).epsilon(1e-13));
  }
}

TEST_CASE("image derivatives agree with finite differences") {
  TwoBranchIntermittentMap m(0.3);
  const auto phi = random_trial(0.3, 5, 2);
  const auto Lphi = apply_operator(m, ConeOperator::kL, phi);
  const double x = 0.37, dx = 1e-5;
  const auto j = Lphi.eval(x);
  CHECK(j[1] == doctest::Approx((Lphi.eval(x + dx)[0] - Lphi.eval(x - dx)[0]) / (2 * dx)).epsilon(1e-6));
  CHECK(j[2] == doctest::Approx((Lphi.eval(x + dx)[1] - Lphi.eval(x - dx)[1]) / (2 * dx)).epsilon(1e-5));
}

TEST_CASE("constants and the density lie in the first cone") {
  Fixture f;
  ConeParams cp;
  const auto xs = cone_samples(*f.g);
  CHECK(in_cone_star1(constant_function(2.0), cp, f.h, xs).member);
  CHECK(in_cone_star1(interpolate_density(f.h), cp, f.h, xs).member);
  // A function taking negative values is not.
  CHECK_FALSE(in_cone_star1(mollified_bump(0.5, 0.2, 1.0) + constant_function(-0.1), cp, f.h, xs).member);
  // Nor is one rising too steeply.
  CHECK_FALSE(in_cone_star1(constant_function(0.01) + mollified_bump(0.5, 0.05, 1.0), cp, f.h, xs).member);
}

TEST_CASE("L maps cone trials into the cone and conserves mass") {
  Fixture f;
  ConeParams cp;
  const auto rep = invariance_harness(f.m, f.h, ConeOperator::kL, ConeKind::kStar1, cp, 20, 3);
  CHECK(rep.admitted == 20);
  CHECK(rep.passed == 20);
  CHECK(rep.min_mass_ratio == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rep.rows.front().trial_id == 0);
}

TEST_CASE("branch operator keeps at least 1/d of the mass of a decreasing function") {
  TwoBranchIntermittentMap m(0.3);
  // phi(x) = 1 + x^-alpha, decreasing on (0, 1).
  ConeFunction phi{[](double x) {
                     const double p = std::pow(x, -0.3);
                     return Jet{1 + p, -0.3 * p / x, 0.39 * p / (x * x), -0.897 * p / (x * x * x)};
                   },
                   "decreasing", {}};
  const auto N1 = apply_operator(m, ConeOperator::kN1, phi);
  const auto g = std::make_shared<const NonuniformGrid>(NonuniformGrid::build(2048, 0.7, 40));
  double mass = 0, mass_n = 0;
  for (int k = 0; k < g->size(); ++k) {
    mass += integrate_cell([&](double x) { return phi(x); }, g->left(k), g->right(k));
    mass_n += integrate_cell([&](double x) { return N1(x); }, g->left(k), g->right(k));
  }
  // m(N_1 phi) is the mass of phi on the first branch interval [0, 1/2].
  CHECK(mass_n >= mass / 2);
  CHECK(mass_n == doctest::Approx(0.5 + std::pow(0.5, 0.7) / 0.7).epsilon(1e-4));
}

TEST_CASE("floor bound away from the neutral point") {
  Fixture f;
  ConeParams cp;
  const auto r = floor_check(f.m, f.h, cp, 20, 9, 0.1);
  CHECK(r.checked == 40);
  CHECK(r.floor == doctest::Approx(cp.floor_constant(0.1)));
  CHECK(r.pass);
}

TEST_CASE("iterates of the constant stay bounded below") {
  Fixture f;
  const auto L = assemble_L(f.m, f.g);
  const double m = min_iterate_of_constant(L, 50);
  CHECK(m > 0.5);
  CHECK(m <= 1.0);
}

TEST_CASE("random trials are reproducible") {
  const auto a = random_trial(0.3, 7, 12), b = random_trial(0.3, 7, 12), c = random_trial(0.3, 8, 12);
  CHECK(a(0.3) == b(0.3));
  CHECK(a(0.3) != c(0.3));
}
