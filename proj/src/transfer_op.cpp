#include "intermittent/transfer_op.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "intermittent/csv.hpp"

namespace intermittent {

using Triplet = Eigen::Triplet<double, int>;

UlamMatrix::UlamMatrix(GridPtr grid, Storage weights, OperatorKind kind, int branch)
    : grid_(std::move(grid)), weights_(std::move(weights)), kind_(kind), branch_(branch) {
  if (weights_.rows() != grid_->size() || weights_.cols() != grid_->size()) {
    throw std::invalid_argument("Ulam matrix shape does not match grid");
  }
  weights_.makeCompressed();
}

void UlamMatrix::apply_values(const std::vector<double>& in, std::vector<double>& out,
                              std::vector<double>& scratch) const {
  const int m = grid_->size();
  const auto& w = grid_->widths();
  scratch.resize(m);
  out.assign(m, 0.0);
  for (int k = 0; k < m; ++k) scratch[k] = in[k] * w[k];
  const int* outer = weights_.outerIndexPtr();
  const int* inner = weights_.innerIndexPtr();
  const double* val = weights_.valuePtr();
  for (int j = 0; j < m; ++j) {
    double s = 0.0;
    for (int p = outer[j]; p < outer[j + 1]; ++p) s += val[p] * scratch[inner[p]];
    out[j] = s / w[j];
  }
}

GridDensity UlamMatrix::apply(const GridDensity& phi) const {
  if (!(phi.grid() == *grid_)) throw std::invalid_argument("grid mismatch in apply");
  std::vector<double> out;
  std::vector<double> scratch;
  apply_values(phi.values(), out, scratch);
  return GridDensity(grid_, std::move(out));
}

std::vector<double> UlamMatrix::column_sums() const {
  std::vector<double> sums(grid_->size(), 0.0);
  for (int j = 0; j < weights_.outerSize(); ++j) {
    for (Storage::InnerIterator it(weights_, j); it; ++it) sums[it.col()] += it.value();
  }
  return sums;
}

UlamMatrix::Storage UlamMatrix::action_matrix() const {
  Storage a = weights_;
  const auto& w = grid_->widths();
  for (int j = 0; j < a.outerSize(); ++j) {
    for (Storage::InnerIterator it(a, j); it; ++it) it.valueRef() *= w[it.col()] / w[j];
  }
  return a;
}

UlamMatrix UlamMatrix::operator+(const UlamMatrix& other) const {
  if (!(other.grid() == *grid_)) throw std::invalid_argument("grid mismatch in sum");
  Storage s = weights_ + other.weights_;
  const bool full = (kind_ == OperatorKind::kBranchN && other.kind_ == OperatorKind::kBranchN);
  return UlamMatrix(grid_, std::move(s), full ? OperatorKind::kFullL : OperatorKind::kOther);
}

std::vector<double> preimage_edges(const CircleMapFamily& map, BranchId i,
                                   const NonuniformGrid& grid) {
  const auto& e = grid.edges();
  std::vector<double> p(e.size());
  for (std::size_t j = 0; j < e.size(); ++j) p[j] = map.inverse(i, e[j]);
  return p;
}

namespace {

void push_branch_triplets(const CircleMapFamily& map, BranchId i, const NonuniformGrid& grid,
                          std::vector<Triplet>& out) {
  const auto p = preimage_edges(map, i, grid);
  const auto& e = grid.edges();
  const int m = grid.size();
  for (int j = 0; j < m; ++j) {
    const double a = p[j];
    const double b = p[j + 1];
    for (int k = grid.locate(a); k < m && e[k] < b; ++k) {
      const double overlap = std::min(b, e[k + 1]) - std::max(a, e[k]);
      if (overlap > 0.0) out.emplace_back(j, k, overlap / grid.width(k));
    }
  }
}

UlamMatrix::Storage from_triplets(int m, const std::vector<Triplet>& t) {
  UlamMatrix::Storage s(m, m);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

}  // namespace

UlamMatrix assemble_N(const CircleMapFamily& map, BranchId i, const GridPtr& grid) {
  const int d = map.branch_count();
  if (i.index < 1 || i.index > d) throw std::invalid_argument("branch index out of range");
  const int m = grid->size();
  const int mirror = d + 1 - i.index;
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(2 * m));
  if (map.reflection_symmetric() && grid->mirror_symmetric() && mirror < i.index) {
    // N_i(j <- k) = N_{d+1-i}(M-1-j <- M-1-k) when f(1-x) = 1 - f(x) and the
    // grid is mirror symmetric; this keeps cells near 1 at the precision of
    // the cells near 0.
    std::vector<Triplet> base;
    push_branch_triplets(map, BranchId{mirror}, *grid, base);
    for (const auto& b : base) t.emplace_back(m - 1 - b.row(), m - 1 - b.col(), b.value());
  } else {
    push_branch_triplets(map, i, *grid, t);
  }
  return UlamMatrix(grid, from_triplets(m, t), OperatorKind::kBranchN, i.index);
}

UlamMatrix assemble_L(const CircleMapFamily& map, const GridPtr& grid) {
  UlamMatrix sum = assemble_N(map, BranchId{1}, grid);
  for (int i = 2; i <= map.branch_count(); ++i) sum = sum + assemble_N(map, BranchId{i}, grid);
  return UlamMatrix(grid, sum.weights(), OperatorKind::kFullL);
}

namespace {

double l1_distance(const std::vector<double>& a, const std::vector<double>& b,
                   const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]) * w[k];
  return s;
}

void normalize_values(std::vector<double>& v, const std::vector<double>& w) {
  const double m = pair(v, w);
  for (double& x : v) x /= m;
}

double fixed_point_residual(const UlamMatrix& L, const std::vector<double>& h) {
  std::vector<double> lh;
  std::vector<double> scratch;
  L.apply_values(h, lh, scratch);
  return l1_distance(lh, h, L.grid().widths());
}

DensityResult power_iteration(const UlamMatrix& L, const DensitySolverConfig& cfg) {
  const auto& w = L.grid().widths();
  const int m = L.grid().size();
  std::vector<double> cur(m, 1.0);
  std::vector<double> next;
  std::vector<double> scratch;
  normalize_values(cur, w);

  // Cesaro fallback: running sum over the second half of the iterates.
  const long half_start = cfg.max_iter / 2;
  std::vector<double> tail_sum(m, 0.0);
  long tail_count = 0;

  DensityResult res;
  for (long it = 1; it <= cfg.max_iter; ++it) {
    L.apply_values(cur, next, scratch);
    normalize_values(next, w);
    const double change = l1_distance(next, cur, w);
    cur.swap(next);
    res.iterations = it;
    if (it > half_start) {
      for (int k = 0; k < m; ++k) tail_sum[k] += cur[k];
      ++tail_count;
    }
    if (change <= cfg.tol_fix) {
      res.converged = true;
      break;
    }
  }
  if (!res.converged && tail_count > 0) {
    for (int k = 0; k < m; ++k) cur[k] = tail_sum[k] / static_cast<double>(tail_count);
    normalize_values(cur, w);
    res.cesaro = true;
  }
  res.residual = fixed_point_residual(L, cur);
  res.density = GridDensity(L.grid_ptr(), std::move(cur));
  return res;
}

DensityResult direct_solve(const UlamMatrix& L, const DensitySolverConfig& cfg) {
  const int m = L.grid().size();
  const auto& w = L.grid().widths();
  // (I - A) h = 0 has a one-dimensional kernel; replace the equation of the
  // middle cell by the normalization sum_k w_k h_k = 1.
  const int pinned = m / 2;
  const UlamMatrix::Storage a = L.action_matrix();
  std::vector<Triplet> t;
  t.reserve(a.nonZeros() + 2 * static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    if (j == pinned) continue;
    t.emplace_back(j, j, 1.0);
    for (UlamMatrix::Storage::InnerIterator it(a, j); it; ++it) t.emplace_back(j, it.col(), -it.value());
  }
  for (int k = 0; k < m; ++k) t.emplace_back(pinned, k, w[k]);
  Eigen::SparseMatrix<double, Eigen::ColMajor, int> sys(m, m);
  sys.setFromTriplets(t.begin(), t.end());
  sys.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double, Eigen::ColMajor, int>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(sys);
  if (lu.info() != Eigen::Success) throw ConvergenceError("sparse LU factorization failed");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs[pinned] = 1.0;
  Eigen::VectorXd sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw ConvergenceError("sparse LU solve failed");

  std::vector<double> h(sol.data(), sol.data() + m);
  for (double& x : h) x = std::max(x, 0.0);
  normalize_values(h, w);

  DensityResult res;
  res.iterations = 0;
  res.residual = fixed_point_residual(L, h);
  res.converged = res.residual <= 10.0 * cfg.tol_fix;
  res.density = GridDensity(L.grid_ptr(), std::move(h));
  return res;
}

}  // namespace

DensityResult invariant_density(const UlamMatrix& L, const DensitySolverConfig& cfg) {
  if (!(cfg.tol_fix > 0.0)) throw std::invalid_argument("tol_fix must be positive");
  if (cfg.method == DensityMethod::kPower) return power_iteration(L, cfg);
  return direct_solve(L, cfg);
}

DensityResult invariant_density(const CircleMapFamily& map, const GridPtr& grid,
                                const DensitySolverConfig& cfg) {
  return invariant_density(assemble_L(map, grid), cfg);
}

namespace {

// Integral over x in [a,b] of |[x-eps, x+eps] ∩ [c,d]|; the integrand is
// piecewise linear with kinks at c +- eps and d +- eps.
double overlap_integral(double a, double b, double c, double d, double eps) {
  auto len = [&](double x) { return std::max(0.0, std::min(x + eps, d) - std::max(x - eps, c)); };
  std::array<double, 6> pts{a, b, c - eps, c + eps, d - eps, d + eps};
  std::sort(pts.begin(), pts.end());
  double s = 0.0;
  double prev = a;
  for (double p : pts) {
    if (p <= prev) continue;
    const double q = std::min(p, b);
    s += 0.5 * (q - prev) * (len(prev) + len(q));
    prev = q;
    if (prev >= b) break;
  }
  return s;
}

// Cells k and shifts s in {-1,0,1} such that cell k + s meets [lo, hi].
template <class Fn>
void for_each_cell_near(const NonuniformGrid& g, double lo, double hi, Fn&& fn) {
  for (int s = -1; s <= 1; ++s) {
    const double a = std::max(lo - s, 0.0);
    const double b = std::min(hi - s, 1.0);
    if (!(b > a)) continue;
    for (int k = g.locate(a); k < g.size() && g.left(k) < b; ++k) fn(k, static_cast<double>(s));
  }
}

}  // namespace

UlamMatrix averaging_operator(double eps, const GridPtr& grid) {
  if (!(eps > grid->min_width()) || !(eps < 0.5)) {
    throw std::invalid_argument("averaging radius must exceed the smallest cell width and be < 1/2");
  }
  const int m = grid->size();
  std::vector<Triplet> t;
  for (int j = 0; j < m; ++j) {
    const double a = grid->left(j);
    const double b = grid->right(j);
    for_each_cell_near(*grid, a - eps, b + eps, [&](int k, double s) {
      const double val = overlap_integral(a, b, grid->left(k) + s, grid->right(k) + s, eps);
      if (val > 0.0) t.emplace_back(j, k, val / (2.0 * eps * grid->width(k)));
    });
  }
  UlamMatrix::Storage w(m, m);
  w.setFromTriplets(t.begin(), t.end());
  return UlamMatrix(grid, std::move(w), OperatorKind::kAveraging);
}

double averaging_at(const GridDensity& phi, double eps, double x) {
  const auto& g = phi.grid();
  double s = 0.0;
  for_each_cell_near(g, x - eps, x + eps, [&](int k, double sh) {
    const double len = std::min(x + eps, g.right(k) + sh) - std::max(x - eps, g.left(k) + sh);
    if (len > 0.0) s += phi[k] * len;
  });
  return s / (2.0 * eps);
}

PerturbedOperator::PerturbedOperator(const UlamMatrix& L, double eps, int n_eps)
    : L_(&L), averaging_(averaging_operator(eps, L.grid_ptr())), eps_(eps), n_eps_(n_eps) {
  if (n_eps < 1) throw std::invalid_argument("n_eps must be >= 1");
}

GridDensity PerturbedOperator::apply(const GridDensity& phi) const {
  std::vector<double> cur;
  std::vector<double> next;
  std::vector<double> scratch;
  averaging_.apply_values(phi.values(), cur, scratch);
  for (int n = 0; n < n_eps_; ++n) {
    L_->apply_values(cur, next, scratch);
    cur.swap(next);
  }
  return GridDensity(phi.grid_ptr(), std::move(cur));
}

KernelMinResult kernel_min(const UlamMatrix& L, double alpha, double eps, int cap) {
  const auto& grid = L.grid_ptr();
  const int m = grid->size();
  if (cap <= 0) cap = static_cast<int>(std::ceil(8.0 * std::pow(eps, -alpha)));
  const UlamMatrix avg = averaging_operator(eps, grid);
  const UlamMatrix::Storage lact = L.action_matrix();

  // Column k of the kernel of A_eps per unit source mass: W_jk / w_j.
  Eigen::MatrixXd kernel = Eigen::MatrixXd(avg.weights());
  for (int j = 0; j < m; ++j) kernel.row(j) /= grid->width(j);

  KernelMinResult res;
  int first_positive = 0;
  for (int n = 1; n <= cap; ++n) {
    kernel = lact * kernel;
    const double mn = kernel.minCoeff();
    res.gamma_by_n.push_back(mn);
    if (mn > 0.0 && first_positive == 0) {
      first_positive = n;
      res.gamma = mn;
      res.n_eps = n;
      res.positive = true;
    }
    // Two further steps document how the minimum evolves past n_eps.
    if (first_positive != 0 && n >= first_positive + 2) break;
  }
  if (!res.positive) res.n_eps = cap;
  return res;
}

void write_matrix_csv(std::ostream& os, const UlamMatrix& mat) {
  os << "row,col,weight\n";
  const auto& w = mat.weights();
  for (int j = 0; j < w.outerSize(); ++j) {
    for (UlamMatrix::Storage::InnerIterator it(w, j); it; ++it) {
      os << j << ',' << it.col() << ',' << csv::num(it.value()) << '\n';
    }
  }
}

}  // namespace intermittent
