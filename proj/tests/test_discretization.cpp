#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "intermittent/discretization.hpp"

using namespace intermittent;

namespace {
GridPtr grid(int m, double r = 0.7, int n = 20) {
  return std::make_shared<const NonuniformGrid>(NonuniformGrid::build(m, r, n));
}
}  // namespace

TEST_CASE("grid is refined toward the neutral point and mirror symmetric") {
  const auto g = grid(1024);
  CHECK(g->size() == 1024);
  CHECK(g->left(0) == 0.0);
  CHECK(g->right(1023) == 1.0);
  CHECK(g->mirror_symmetric());
  for (int k = 0; k <= g->size(); ++k) CHECK(g->edges()[g->size() - k] == 1.0 - g->edges()[k]);
  CHECK(g->width(0) < g->width(1));
  CHECK(g->width(1) / g->width(2) == doctest::Approx(0.7));
  double total = 0;
  for (double w : g->widths()) total += w;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("locate finds the containing cell") {
  const auto g = grid(256);
  for (int k = 0; k < g->size(); ++k) {
    CHECK(g->locate(g->center(k)) == k);
    CHECK(g->locate(g->left(k)) == k);
  }
  CHECK(g->locate(1.0) == g->size() - 1);
}

TEST_CASE("too small cells are rejected") {
  CHECK_THROWS(NonuniformGrid::build(1 << 14, 0.7, 80));
  CHECK_THROWS(NonuniformGrid::from_edges({0.0, 0.5, 0.4, 1.0}));
}

TEST_CASE("projection and integration are exact for polynomials of degree <= 9") {
  const auto g = grid(64);
  auto p = [](double x) { return 3 * std::pow(x, 9) - x * x + 2; };
  // int_0^1 p = 3/10 - 1/3 + 2
  const double exact = 0.3 - 1.0 / 3.0 + 2.0;
  CHECK(project(p, g).mass() == doctest::Approx(exact).epsilon(1e-14));
  CHECK(lebesgue_integral(GridDensity::constant(g, 1.0), p) == doctest::Approx(exact).epsilon(1e-14));
  const auto ints = cell_integrals(p, *g);
  std::vector<double> ones(g->size(), 1.0);
  CHECK(pair(ones, ints) == doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("integral of cos 2 pi x against a step density") {
  const auto g = std::make_shared<const NonuniformGrid>(NonuniformGrid::from_edges({0.0, 0.25, 0.5, 1.0}));
  GridDensity h(g, {4.0, 0.0, 0.0});
  // 4 int_0^{1/4} cos 2 pi x = 4 / (2 pi)
  CHECK(lebesgue_integral(h, [](double x) { return std::cos(2 * std::numbers::pi * x); }) ==
        doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-10));
}

TEST_CASE("density arithmetic, norms and normalization") {
  const auto g = grid(32, 0.7, 4);
  auto a = GridDensity::constant(g, 2.0);
  CHECK(a.mass() == doctest::Approx(2.0));
  a.normalize();
  CHECK(a.mass() == doctest::Approx(1.0));
  auto d = a - GridDensity::constant(g, 3.0);
  CHECK(d.l1_norm() == doctest::Approx(2.0));
  CHECK_FALSE(d.is_nonnegative());
  CHECK_THROWS(d.normalize());
}

TEST_CASE("density CSV round trip keeps 17 digits") {
  const auto g = grid(128);
  const auto h = project([](double x) { return 1.0 + std::sin(7 * x); }, g);
  std::stringstream ss;
  write_density_csv(ss, h);
  CHECK(ss.str().rfind("cell_left,cell_right,value\n", 0) == 0);
  const auto back = read_density_csv(ss);
  CHECK(back.grid() == h.grid());
  CHECK(back.values() == h.values());
}
