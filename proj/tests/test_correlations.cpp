#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "intermittent/correlations.hpp"

using namespace intermittent;

TEST_CASE("fit recovers an exact power law") {
  std::vector<double> seq;
  for (int n = 1; n <= 2000; ++n) seq.push_back(3.0 * std::pow(n, -1.5));
  const auto f = fit_decay(seq, 50, 2000);
  CHECK(f.exponent == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(f.residual < 1e-12);
  CHECK_FALSE(f.geometric_preferred);
  CHECK(f.n.front() == 50);
  CHECK(f.n.back() == 2000);
}

TEST_CASE("fit with the log log correction separates both terms") {
  std::vector<double> seq;
  for (int n = 1; n <= 5000; ++n) seq.push_back(std::pow(n, -1.0) * std::pow(std::log(n), 2.0));
  const auto f = fit_decay(seq, 50, 5000, true);
  CHECK(f.exponent == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(f.loglog_coefficient == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("geometric sequences prefer the geometric model") {
  std::vector<double> seq;
  for (int n = 1; n <= 300; ++n) seq.push_back(std::pow(0.95, n));
  const auto f = fit_decay(seq, 10, 300);
  CHECK(f.geometric_preferred);
  CHECK(f.geometric_rate == doctest::Approx(0.95).epsilon(1e-10));
}

TEST_CASE("noise floor and short windows") {
  std::vector<double> seq(100, 1e-20);
  CHECK_THROWS_AS(fit_decay(seq, 10, 100, false, 1e-15), std::invalid_argument);
  CHECK_THROWS_AS(fit_decay(seq, 1, 12), std::invalid_argument);
}

TEST_CASE("doubling map correlations vanish after finitely many steps for dyadic data") {
  std::vector<double> e;
  for (int k = 0; k <= 64; ++k) e.push_back(k / 64.0);
  const auto g = std::make_shared<const NonuniformGrid>(NonuniformGrid::from_edges(e));
  TwoBranchIntermittentMap m(0.0);
  const auto L = assemble_L(m, g);
  const auto phi = project([](double x) { return x < 0.5 ? 1.0 : -1.0; }, g);
  const auto seq = correlation_sequence(L, phi, [](double x) { return std::cos(2 * std::numbers::pi * x); }, 10);
  for (double c : seq) CHECK(c < 1e-14);
}

TEST_CASE("correlation sequence requires zero mass") {
  const auto g = std::make_shared<const NonuniformGrid>(NonuniformGrid::build(64, 0.7, 5));
  TwoBranchIntermittentMap m(0.3);
  const auto L = assemble_L(m, g);
  CHECK_THROWS(correlation_sequence(L, GridDensity::constant(g, 1.0), [](double) { return 1.0; }, 5));
}

TEST_CASE("h - 1 correlations decay polynomially with exponent near 1 - 1/alpha") {
  const auto g = std::make_shared<const NonuniformGrid>(NonuniformGrid::build(4096, 0.7, 40));
  TwoBranchIntermittentMap m(0.5);
  const auto L = assemble_L(m, g);
  const auto h = invariant_density(L).density;
  const auto seq = correlation_sequence(L, h - GridDensity::constant(g, 1.0),
                                        [](double x) { return std::cos(2 * std::numbers::pi * x); }, 1000);
  const auto f = fit_decay(seq, 50, 1000);
  CHECK(f.exponent == doctest::Approx(-1.0).epsilon(0.25));
  CHECK_FALSE(f.geometric_preferred);
}

TEST_CASE("correlation CSV") {
  std::stringstream ss;
  write_correlation_csv(ss, {0.5, 0.25});
  CHECK(ss.str() == "n,correlation\n1,0.5\n2,0.25\n");
}
