#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "intermittent/response.hpp"
#include "intermittent/rng.hpp"
#include "intermittent/solenoid.hpp"

using namespace intermittent;

TEST_CASE("solenoid fixed point over the neutral point") {
  TwoBranchIntermittentMap m(0.2);
  // F(0, y, z) = (0, 1/2 + y/5, z/5) fixes (0, 5/8, 0).
  const SolenoidState s{0.0, 0.625, 0.0};
  const auto t = solenoid_step(m, s);
  CHECK(t.x == 0.0);
  CHECK(t.y == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(t.z == 0.0);
}

TEST_CASE("fiber contraction, semi-conjugacy and confinement") {
  TwoBranchIntermittentMap m(0.3);
  const auto inv = check_invariants(m, 2000, 100000, 4);
  CHECK(inv.contraction_error <= 1e-14);
  CHECK(inv.semiconjugacy_mismatches == 0);
  CHECK(inv.max_fiber_radius <= 1.0);
  // The attractor lies within radius 1/2 / (1 - 1/5) of the fiber center.
  CHECK(inv.max_fiber_radius <= 0.625 + 1e-12);
}

TEST_CASE("counter RNG is deterministic and stream separated") {
  CounterRng a(1, 2), b(1, 2), c(1, 3);
  for (int k = 0; k < 10; ++k) {
    const auto x = a.next();
    CHECK(x == b.next());
    CHECK(x != c.next());
  }
  CHECK(a.counter() == 10);
  CHECK(CounterRng(1, 2).at(5) == CounterRng(1, 2).at(5));
  double mean = 0;
  CounterRng u(9, 0);
  for (int k = 0; k < 100000; ++k) mean += u.uniform();
  CHECK(mean / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("pairwise sum is exact on integers and order fixed") {
  std::vector<double> v;
  for (int k = 1; k <= 1001; ++k) v.push_back(k);
  CHECK(pairwise_sum(v) == 1001.0 * 1002.0 / 2.0);
  CHECK(pairwise_sum({}) == 0.0);
}

TEST_CASE("Birkhoff averages do not depend on the worker count") {
  TwoBranchIntermittentMap m(0.2);
  BirkhoffConfig c;
  c.orbit_length = 200000;
  c.burn_in = 1000;
  c.streams = 4;
  c.batches = 10;
  const auto a = birkhoff_average(m, {NamedTorusObservable::base_cos()}, c);
  c.workers = 3;
  const auto b = birkhoff_average(m, {NamedTorusObservable::base_cos()}, c);
  CHECK(a.mean[0] == b.mean[0]);
  CHECK(a.std_error[0] == b.std_error[0]);
  CHECK(a.samples == 200000);
}

TEST_CASE("base observable Birkhoff average matches the density integral") {
  TwoBranchIntermittentMap m(0.2);
  BirkhoffConfig c;
  c.orbit_length = 2'000'000;
  c.streams = 4;
  const auto g = std::make_shared<const NonuniformGrid>(NonuniformGrid::build(4096, 0.7, 40));
  const double exact = lebesgue_integral(invariant_density(m, g).density, Observable::cos2pi().fn);
  const auto b = birkhoff_average(m, {NamedTorusObservable::base_cos(), NamedTorusObservable::one()}, c);
  CHECK(std::abs(b.mean[0] - exact) < 4 * b.std_error[0]);
  CHECK(b.mean[1] == 1.0);
}

TEST_CASE("lift envelopes contract by 1/5 per step and the lift of 1 is 1") {
  TwoBranchIntermittentMap m(0.2);
  const auto g = std::make_shared<const NonuniformGrid>(NonuniformGrid::build(1024, 0.7, 20));
  const auto h = invariant_density(m, g).density;
  LiftConfig lc;
  lc.x_bins = 32;
  lc.x_per_bin = 4;
  lc.n_fiber = 16;
  lc.k_depth = 4;
  const auto a = lift_expectation(m, h, NamedTorusObservable::fiber_y(), lc);
  lc.k_depth = 5;
  const auto b = lift_expectation(m, h, NamedTorusObservable::fiber_y(), lc);
  CHECK(a.envelope_gap / b.envelope_gap >= 4.0);
  CHECK(b.envelope_gap <= b.envelope_bound);
  CHECK(b.upper >= b.lower);
  CHECK(lift_expectation(m, h, NamedTorusObservable::one(), lc).estimate == 1.0);
  // The lift of a base observable is its mu-integral.
  lc.x_bins = 256;
  lc.x_per_bin = 16;
  const auto c = lift_expectation(m, h, NamedTorusObservable::base_cos(), lc);
  CHECK(c.estimate == doctest::Approx(lebesgue_integral(h, Observable::cos2pi().fn)).epsilon(0.05));
}

TEST_CASE("stability with a constant sequence has only noise-level gaps") {
  TwoBranchIntermittentMap m(0.2);
  BirkhoffConfig c;
  c.orbit_length = 100000;
  c.streams = 4;
  c.batches = 10;
  const auto t = stability_experiment(m, {0.2, 0.2}, 0.2, {NamedTorusObservable::base_cos()}, c);
  for (const auto& r : t.rows) CHECK(r.gap == 0.0);
}

TEST_CASE("orbit CSV") {
  TwoBranchIntermittentMap m(0.2);
  std::stringstream ss;
  write_orbit_csv(ss, m, {0.3, 0.0, 0.0}, 10, 5);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "step,x,y,z");
  int rows = 0;
  while (std::getline(ss, line)) ++rows;
  CHECK(rows >= 2);
}
