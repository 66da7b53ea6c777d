#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "intermittent/response.hpp"

using namespace intermittent;

namespace {

GridPtr grid(int m, int n = 40) {
  return std::make_shared<const NonuniformGrid>(NonuniformGrid::build(m, 0.7, n));
}

/// Sine integral: Simpson's rule on sin t / t for moderate x, the asymptotic
/// expansion beyond.
double si(double x) {
  if (x > 64.0) {
    const double x2 = x * x;
    return std::numbers::pi / 2 - std::cos(x) / x * (1 - 2 / x2 + 24 / (x2 * x2)) -
           std::sin(x) / x2 * (1 - 6 / x2 + 120 / (x2 * x2));
  }
  const int n = 20000;
  const double h = x / n;
  auto f = [](double t) { return t == 0.0 ? 1.0 : std::sin(t) / t; };
  double s = f(0) + f(x);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(k * h);
  return s * h / 3;
}

}  // namespace

TEST_CASE("sine integral helper") {
  CHECK(si(1.0) == doctest::Approx(0.9460830703671830).epsilon(1e-12));
  CHECK(si(100.0) == doctest::Approx(1.5622254668890563).epsilon(1e-10));
}

TEST_CASE("response at alpha = 0 matches the closed form") {
  // h_0 = 1, X_1(x) = (x/2) ln x, X_2(x) = -((1-x)/2) ln(1-x), and the Neumann
  // series of the doubling map gives sum_j Si(2 pi 2^j) / (4 pi 2^j).
  double closed = 0.0;
  for (int j = 0; j < 60; ++j) {
    const double t = 2 * std::numbers::pi * std::ldexp(1.0, j);
    closed += si(t) / (2 * t);
  }
  CHECK(closed == doctest::Approx(0.2336713).epsilon(1e-6));
  TwoBranchIntermittentMap m(0.0);
  ResponseConfig rc;
  rc.m_total = 4096;
  const auto rep = response_formula(m, Observable::cos2pi(), rc);
  CHECK(rep.neumann.converged);
  CHECK(rep.formula_value == doctest::Approx(closed).epsilon(2e-3));
}

TEST_CASE("flux source has zero mass; product rule does not to the same accuracy") {
  const auto g = grid(4096);
  TwoBranchIntermittentMap m(0.3);
  const auto h = invariant_density(m, g).density;
  const auto s = source_term(m, h);
  CHECK(std::abs(s.mass()) < 1e-12);
  CHECK(s.l1_norm() > 0.1);
  const auto p = source_term(m, h, SourceScheme::kProductRule);
  CHECK(std::abs(p.mass()) < 1e-3);
  // Both discretize the same function: cell values of the flux form jump with
  // the piecewise-constant h, but averages over a window agree.
  for (double lo : {0.1, 0.25, 0.45, 0.6}) {
    double a = 0, b = 0;
    for (int k = g->locate(lo); k < g->locate(lo + 0.05); ++k) {
      a += s[k] * g->width(k);
      b += p[k] * g->width(k);
    }
    CHECK(b == doctest::Approx(a).epsilon(5e-3));
  }
}

TEST_CASE("flux source is minus the alpha-derivative of the Ulam operator applied to h") {
  const auto g = grid(1024);
  const double a = 0.3, da = 1e-6;
  TwoBranchIntermittentMap m(a), up(a + da), dn(a - da);
  const auto h = invariant_density(m, g).density;
  const auto d = (1.0 / (2 * da)) * (assemble_L(up, g).apply(h) - assemble_L(dn, g).apply(h));
  const auto s = source_term(m, h);
  for (int k = 100; k < g->size() - 100; k += 97) CHECK(-d[k] == doctest::Approx(s[k]).epsilon(1e-4));
}

TEST_CASE("constant observable has zero response") {
  TwoBranchIntermittentMap m(0.2);
  ResponseConfig rc;
  rc.m_total = 2048;
  CHECK(std::abs(response_formula(m, Observable::constant_one(), rc).formula_value) < 1e-10);
  CHECK(std::abs(fd_derivative(m, Observable::constant_one(), rc).limit) < 1e-10);
}

TEST_CASE("formula agrees with finite differences at alpha = 0.2 on a coarse grid") {
  TwoBranchIntermittentMap m(0.2);
  ResponseConfig rc;
  rc.m_total = 4096;
  const auto rep = response_formula(m, Observable::cos2pi(), rc);
  const auto fd = fd_derivative(m, Observable::cos2pi(), rc);
  CHECK_FALSE(fd.one_sided);
  CHECK(fd.steps.size() == 3);
  CHECK(rep.formula_value == doctest::Approx(fd.limit).epsilon(0.05));
}

TEST_CASE("mirrored observable gives the same response by symmetry") {
  TwoBranchIntermittentMap m(0.2);
  ResponseConfig rc;
  rc.m_total = 2048;
  const auto a = response_formula(m, Observable::cos2pi(), rc).formula_value;
  const auto b = response_formula(m, Observable::cos2pi().mirrored(), rc).formula_value;
  CHECK(a == doctest::Approx(b).epsilon(1e-8));
}

TEST_CASE("one-sided quotients at alpha = 0") {
  TwoBranchIntermittentMap m(0.0);
  ResponseConfig rc;
  rc.m_total = 1024;
  const auto fd = fd_derivative(m, Observable::cos2pi(), rc);
  CHECK(fd.one_sided);
  CHECK(fd.limit == doctest::Approx(0.2337).epsilon(0.02));
}

TEST_CASE("tail fit recognizes power laws and geometric decay") {
  std::vector<double> pw, geo;
  for (int j = 0; j < 400; ++j) {
    pw.push_back(std::pow(j + 1.0, -3.0));
    geo.push_back(std::pow(0.9, j));
  }
  const auto a = fit_tail(pw, 50);
  CHECK(a.power_exponent == doctest::Approx(-3.0).epsilon(1e-2));
  CHECK_FALSE(a.geometric_preferred);
  // sum_{j > 400} j^-3 ~ 1 / (2 * 400^2)
  CHECK(a.tail == doctest::Approx(1.0 / (2 * 400.0 * 400.0)).epsilon(0.05));
  const auto b = fit_tail(geo, 50);
  CHECK(b.geometric_preferred);
  CHECK(b.geometric_rate == doctest::Approx(0.9).epsilon(1e-10));
}

TEST_CASE("Neumann sum of a geometric chain") {
  // Two-cell grid where L swaps nothing and halves the deviation from the mean.
  TwoBranchIntermittentMap m(0.0);
  const auto g = std::make_shared<const NonuniformGrid>(NonuniformGrid::from_edges({0.0, 0.5, 1.0}));
  const auto L = assemble_L(m, g);
  // The doubling map sends each half uniformly over the circle: L s = mean(s).
  GridDensity s(g, {1.0, -1.0});
  const auto psi = cell_integrals([](double x) { return x; }, *g);
  const auto r = neumann_sum(L, s, psi);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(0.125 - 0.375).epsilon(1e-12));
}

TEST_CASE("summary JSON carries the required fields") {
  ResponseReport r;
  r.alpha = 0.2;
  r.psi_id = "cos";
  const auto js = response_summary_json(r);
  for (const char* key : {"alpha", "psi_id", "formula_value", "fd_limit", "fd_uncertainty", "J", "tail_estimate"}) {
    CHECK(js.find(std::string("\"") + key + "\"") != std::string::npos);
  }
}
