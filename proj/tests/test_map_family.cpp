#include <cmath>

#include "doctest.h"
#include "intermittent/map_family.hpp"

using namespace intermittent;

TEST_CASE("two-branch map matches hand-computed values") {
  TwoBranchIntermittentMap m(0.5);
  CHECK(m.f(0.25) == doctest::Approx(0.25 + 0.25 * std::sqrt(0.5)).epsilon(1e-15));
  CHECK(m.f(0.25) == doctest::Approx(0.4267767).epsilon(1e-7));
  CHECK(m.f(0.75) == doctest::Approx(0.5732233).epsilon(1e-7));
  // f'(x) = 1 + (1 + alpha)(2x)^alpha at x = 1/4.
  CHECK(m.deriv(0.25, 1) == doctest::Approx(2.0606602).epsilon(1e-7));
  TwoBranchIntermittentMap m0(0.0);
  CHECK(m0.v(0.25) == doctest::Approx(0.25 * std::log(0.5)).epsilon(1e-14));
  CHECK(m0.v(0.25) == doctest::Approx(-0.1732868).epsilon(1e-7));
  CHECK(m0.dalpha_inverse(BranchId{1}, 0.5) == doctest::Approx(0.0866434).epsilon(1e-7));
}

TEST_CASE("alpha = 0 is the doubling map") {
  TwoBranchIntermittentMap m(0.0);
  for (double x : {0.0, 0.1, 0.3, 0.49, 0.5, 0.7, 0.99}) {
    CHECK(m.f(x) == doctest::Approx(std::fmod(2 * x, 1.0)).epsilon(1e-15));
  }
  CHECK(m.inverse(BranchId{1}, 0.6) == doctest::Approx(0.3));
  CHECK(m.inverse(BranchId{2}, 0.6) == doctest::Approx(0.8));
}

TEST_CASE("reflection symmetry f(1 - x) = 1 - f(x)") {
  for (double a : {0.1, 0.3, 0.67}) {
    TwoBranchIntermittentMap m(a);
    for (double x : {0.01, 0.2, 0.37, 0.45}) {
      CHECK(m.f(1.0 - x) == doctest::Approx(1.0 - m.f(x)).epsilon(1e-13));
      CHECK(m.deriv(1.0 - x, 1) == doctest::Approx(m.deriv(x, 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("neutral fixed point") {
  TwoBranchIntermittentMap m(0.4);
  CHECK(m.f(0.0) == 0.0);
  CHECK(m.deriv(1e-12, 1) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("inverse branches invert f") {
  TwoBranchIntermittentMap m(0.3);
  for (double y : {1e-9, 1e-4, 0.2, 0.5, 0.8, 1 - 1e-6}) {
    for (int b : {1, 2}) {
      const double x = m.inverse(BranchId{b}, y);
      CHECK(m.branch_value(b, x) == doctest::Approx(y).epsilon(1e-13));
    }
  }
}

TEST_CASE("x-derivatives agree with finite differences") {
  TwoBranchIntermittentMap m(0.3);
  const double x = 0.3, h = 1e-5;
  for (int k = 1; k <= 3; ++k) {
    const double lower = k == 1 ? m.branch_value(1, x + h) - m.branch_value(1, x - h)
                                : m.branch_deriv(1, x + h, k - 1) - m.branch_deriv(1, x - h, k - 1);
    CHECK(m.branch_deriv(1, x, k) == doctest::Approx(lower / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("v is the alpha-derivative of f and X_i = v o g_i") {
  const double a = 0.35, da = 1e-6;
  TwoBranchIntermittentMap m(a), up(a + da), dn(a - da);
  for (double x : {0.05, 0.3, 0.6, 0.95}) {
    CHECK(m.v(x) == doctest::Approx((up.f(x) - dn.f(x)) / (2 * da)).epsilon(1e-7));
  }
  for (double y : {0.1, 0.5, 0.9}) {
    for (int b : {1, 2}) {
      CHECK(m.X(BranchId{b}, y) == doctest::Approx(m.v(m.inverse(BranchId{b}, y))).epsilon(1e-12));
    }
  }
  // The perturbation vanishes at the critical point 1/2 of the mirror pair.
  CHECK(std::abs(m.v(0.5)) < 1e-15);
}

TEST_CASE("X derivatives agree with finite differences") {
  TwoBranchIntermittentMap m(0.4);
  const double y = 0.37, h = 1e-5;
  for (int b : {1, 2}) {
    const BranchId i{b};
    for (int k = 1; k <= 3; ++k) {
      const double fd = (m.X(i, y + h, k - 1) - m.X(i, y - h, k - 1)) / (2 * h);
      CHECK(m.X(i, y, k) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("X is singular at the neutral point") {
  TwoBranchIntermittentMap m(0.3);
  CHECK_THROWS_AS(m.X(BranchId{1}, 0.0), DomainError);
}

TEST_CASE("partition sequences decrease to the neutral point like n^(-1/alpha)") {
  TwoBranchIntermittentMap m(0.5);
  const auto s = partition_sequences(m, 2000);
  REQUIRE(s.z.size() == 2001);
  CHECK(m.f(s.z[0]) == doctest::Approx(0.5).epsilon(1e-14));
  for (std::size_t n = 1; n < s.z.size(); ++n) {
    CHECK(s.z[n] < s.z[n - 1]);
    CHECK(m.f(s.z[n]) == doctest::Approx(s.z[n - 1]).epsilon(1e-12));
  }
  // Mirror sequence equals the direct one by symmetry.
  CHECK(s.z_prime[1000] == doctest::Approx(s.z[1000]).epsilon(1e-10));
  // z_n ~ (alpha n)^(-1/alpha) / 2 for large n.
  const double n = 2000;
  CHECK(s.z[2000] * 2.0 * std::pow(0.5 * n, 2.0) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS(TwoBranchIntermittentMap(1.0));
  CHECK_THROWS(TwoBranchIntermittentMap(-0.1));
}
