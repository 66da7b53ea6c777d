#include <cmath>
#include <memory>

#include "doctest.h"
#include "intermittent/transfer_op.hpp"

using namespace intermittent;

namespace {
GridPtr grid(int m, int n = 20) {
  return std::make_shared<const NonuniformGrid>(NonuniformGrid::build(m, 0.7, n));
}
}  // namespace

TEST_CASE("Ulam matrix of L is column stochastic and nonnegative") {
  const auto g = grid(512);
  for (double a : {0.0, 0.3, 0.7}) {
    TwoBranchIntermittentMap m(a);
    const auto L = assemble_L(m, g);
    for (double s : L.column_sums()) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    const auto& W = L.weights();
    for (int k = 0; k < W.outerSize(); ++k) {
      for (UlamMatrix::Storage::InnerIterator it(W, k); it; ++it) CHECK(it.value() >= 0.0);
    }
  }
}

TEST_CASE("doubling map on a uniform dyadic grid: each cell splits evenly") {
  std::vector<double> e;
  for (int k = 0; k <= 8; ++k) e.push_back(k / 8.0);
  const auto g = std::make_shared<const NonuniformGrid>(NonuniformGrid::from_edges(e));
  TwoBranchIntermittentMap m(0.0);
  const auto L = assemble_L(m, g);
  // Target cell j receives half of source cells j/2 and (j+8)/2 (integer part).
  GridDensity e0(g, std::vector<double>(8, 0.0));
  e0.values()[0] = 8.0;  // unit mass in cell 0
  const auto img = L.apply(e0);
  CHECK(img[0] == doctest::Approx(4.0));
  CHECK(img[1] == doctest::Approx(4.0));
  for (int j = 2; j < 8; ++j) CHECK(img[j] == doctest::Approx(0.0));
}

TEST_CASE("branch operators sum to L") {
  const auto g = grid(256);
  TwoBranchIntermittentMap m(0.4);
  const auto L = assemble_L(m, g);
  const auto N = assemble_N(m, BranchId{1}, g) + assemble_N(m, BranchId{2}, g);
  const auto phi = project([](double x) { return 1 + x * x; }, g);
  const auto a = L.apply(phi), b = N.apply(phi);
  for (int k = 0; k < g->size(); ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
}

TEST_CASE("invariant density at alpha = 0 is Lebesgue") {
  TwoBranchIntermittentMap m(0.0);
  const auto r = invariant_density(m, grid(1024));
  CHECK(r.converged);
  for (double v : r.density.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("direct and power solvers agree") {
  TwoBranchIntermittentMap m(0.3);
  const auto g = grid(512);
  const auto L = assemble_L(m, g);
  DensitySolverConfig power;
  power.method = DensityMethod::kPower;
  power.tol_fix = 1e-12;
  const auto a = invariant_density(L);
  const auto b = invariant_density(L, power);
  CHECK(a.converged);
  CHECK(b.converged);
  CHECK((a.density - b.density).l1_norm() < 1e-8);
  CHECK(a.residual < 1e-12);
  CHECK(a.density.mass() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("density is symmetric and peaks at the neutral point") {
  TwoBranchIntermittentMap m(0.5);
  const auto g = grid(2048);
  const auto h = invariant_density(m, g).density;
  const int M = g->size();
  for (int k = 0; k < M / 2; k += 37) CHECK(h[k] == doctest::Approx(h[M - 1 - k]).epsilon(1e-8));
  CHECK(h[0] > h[M / 4]);
  CHECK(h[M / 4] > h[M / 2 - 1]);
}

TEST_CASE("averaging operator preserves mass and constants") {
  const auto g = grid(512);
  const auto A = averaging_operator(1.0 / 64, g);
  const auto one = A.apply(GridDensity::constant(g, 1.0));
  for (double v : one.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  const auto phi = project([](double x) { return x < 0.3 ? 2.0 : 0.5; }, g);
  CHECK(A.apply(phi).mass() == doctest::Approx(phi.mass()).epsilon(1e-12));
  // Pointwise average of the step at the jump: half of each side.
  CHECK(averaging_at(phi, 0.01, 0.3) == doctest::Approx(1.25).epsilon(1e-2));
}

TEST_CASE("kernel becomes positive within 8 eps^-alpha steps") {
  TwoBranchIntermittentMap m(0.3);
  const auto L = assemble_L(m, grid(512));
  const auto r = kernel_min(L, 0.3, 1.0 / 64);
  CHECK(r.positive);
  CHECK(r.gamma > 0.0);
  CHECK(r.n_eps <= std::ceil(8 * std::pow(64.0, 0.3)));
  CHECK(r.gamma_by_n[r.n_eps - 1] == doctest::Approx(r.gamma));
  if (r.n_eps > 1) CHECK(r.gamma_by_n[r.n_eps - 2] <= 0.0);
}

TEST_CASE("perturbed operator contracts zero-mean functions") {
  TwoBranchIntermittentMap m(0.3);
  const auto g = grid(512);
  const auto L = assemble_L(m, g);
  const auto r = kernel_min(L, 0.3, 1.0 / 64);
  REQUIRE(r.positive);
  PerturbedOperator P(L, 1.0 / 64, r.n_eps);
  auto phi = project([](double x) { return std::sin(6.283185307179586 * x) + (x < 0.1 ? 3.0 : 0.0); }, g);
  phi -= GridDensity::constant(g, phi.mass());
  const double n0 = phi.l1_norm();
  for (int k = 1; k <= 5; ++k) {
    phi = P.apply(phi);
    CHECK(phi.l1_norm() <= std::pow(1 - r.gamma, k) * n0 + 1e-8);
    CHECK(std::abs(phi.mass()) < 1e-12);
  }
}
