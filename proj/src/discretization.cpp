#include "intermittent/discretization.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "intermittent/csv.hpp"

namespace intermittent {

namespace {

// Snap to a multiple of 2^-53 so that 1 - e is exact.
double snap(double e) { return std::ldexp(std::round(std::ldexp(e, 53)), -53); }

}  // namespace

NonuniformGrid::NonuniformGrid(std::vector<double> edges, double ratio, int n_geometric)
    : edges_(std::move(edges)), ratio_(ratio), n_geometric_(n_geometric) {
  const int m = static_cast<int>(edges_.size()) - 1;
  if (m < 1 || edges_.front() != 0.0 || edges_.back() != 1.0) {
    throw std::invalid_argument("grid edges must start at 0 and end at 1");
  }
  widths_.resize(m);
  for (int k = 0; k < m; ++k) {
    widths_[k] = edges_[k + 1] - edges_[k];
    if (!(widths_[k] > 0.0)) throw std::invalid_argument("grid edges must strictly increase");
    if (widths_[k] < kMinCellWidth) {
      throw std::invalid_argument("grid cell width " + std::to_string(widths_[k]) +
                                  " below the 1e-12 floor");
    }
  }
  symmetric_ = true;
  for (int k = 0; k <= m; ++k) {
    if (edges_[m - k] != 1.0 - edges_[k]) {
      symmetric_ = false;
      break;
    }
  }
}

NonuniformGrid NonuniformGrid::build(int m_total, double refinement_ratio, int n_geometric) {
  if (m_total < 16) throw std::invalid_argument("M_total must be >= 16");
  if (!(refinement_ratio > 0.0 && refinement_ratio < 1.0)) {
    throw std::invalid_argument("refinement_ratio must lie in (0,1)");
  }
  if (n_geometric < 0 || m_total - 2 * n_geometric < 1) {
    throw std::invalid_argument("n_geometric must leave at least one interior cell");
  }
  const double r = refinement_ratio;
  const int n = n_geometric;
  // Geometric zone width in units of the interior width w: r + r^2 + ... + r^n.
  const double zone = n == 0 ? 0.0 : r * (1.0 - std::pow(r, n)) / (1.0 - r);
  const double w = 1.0 / (static_cast<double>(m_total - 2 * n) + 2.0 * zone);

  std::vector<double> edges(m_total + 1);
  const int half = m_total / 2;
  edges[0] = 0.0;
  double acc = 0.0;
  for (int k = 1; k <= half; ++k) {
    if (k <= n) {
      acc += w * std::pow(r, n + 1 - k);
    } else {
      acc = w * (zone + static_cast<double>(k - n));
    }
    edges[k] = n == 0 ? static_cast<double>(k) / m_total : snap(acc);
  }
  if (m_total % 2 == 0) edges[half] = 0.5;
  for (int k = 0; k <= half; ++k) edges[m_total - k] = 1.0 - edges[k];
  return NonuniformGrid(std::move(edges), refinement_ratio, n_geometric);
}

NonuniformGrid NonuniformGrid::from_edges(std::vector<double> edges) {
  return NonuniformGrid(std::move(edges), 1.0, 0);
}

double NonuniformGrid::min_width() const {
  return *std::min_element(widths_.begin(), widths_.end());
}

int NonuniformGrid::locate(double x) const {
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
  const int k = static_cast<int>(it - edges_.begin()) - 1;
  return std::clamp(k, 0, size() - 1);
}

std::string NonuniformGrid::describe() const {
  std::ostringstream os;
  os << "M=" << size() << ";ratio=" << ratio_ << ";n_geometric=" << n_geometric_
     << ";min_width=" << min_width();
  return os.str();
}

GridDensity::GridDensity(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw std::invalid_argument("density requires a grid");
  if (static_cast<int>(values_.size()) != grid_->size()) {
    throw std::invalid_argument("density size does not match grid");
  }
}

GridDensity GridDensity::constant(GridPtr grid, double c) {
  const int m = grid->size();
  return GridDensity(std::move(grid), std::vector<double>(m, c));
}

double GridDensity::mass() const { return pair(values_, grid_->widths()); }

double GridDensity::l1_norm() const {
  double s = 0.0;
  const auto& w = grid_->widths();
  for (std::size_t k = 0; k < values_.size(); ++k) s += std::abs(values_[k]) * w[k];
  return s;
}

bool GridDensity::is_nonnegative() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
}

GridDensity& GridDensity::normalize() {
  const double m = mass();
  if (!(m > 0.0) || !std::isfinite(m)) throw std::domain_error("cannot normalize: mass is not positive");
  for (double& v : values_) v /= m;
  return *this;
}

GridDensity& GridDensity::operator+=(const GridDensity& other) {
  if (!(*grid_ == *other.grid_)) throw std::invalid_argument("grid mismatch");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

GridDensity& GridDensity::operator-=(const GridDensity& other) {
  if (!(*grid_ == *other.grid_)) throw std::invalid_argument("grid mismatch");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

GridDensity& GridDensity::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

GridDensity operator+(GridDensity a, const GridDensity& b) { return a += b; }
GridDensity operator-(GridDensity a, const GridDensity& b) { return a -= b; }
GridDensity operator*(double s, GridDensity a) { return a *= s; }

const QuadratureRule& gauss_legendre(int order) {
  if (order != 5) throw std::invalid_argument("only the 5-point rule is tabulated");
  static const QuadratureRule rule{
      {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640},
      {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
       0.2369268850561891}};
  return rule;
}

double integrate_cell(const PointFunction& fn, double a, double b) {
  const auto& q = gauss_legendre();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double s = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * fn(mid + half * q.nodes[i]);
  return s * half;
}

GridDensity project(const PointFunction& fn, const GridPtr& grid) {
  const int m = grid->size();
  std::vector<double> vals(m);
  for (int k = 0; k < m; ++k) {
    vals[k] = integrate_cell(fn, grid->left(k), grid->right(k)) / grid->width(k);
  }
  return GridDensity(grid, std::move(vals));
}

std::vector<double> cell_integrals(const PointFunction& psi, const NonuniformGrid& grid) {
  std::vector<double> out(grid.size());
  for (int k = 0; k < grid.size(); ++k) out[k] = integrate_cell(psi, grid.left(k), grid.right(k));
  return out;
}

double pair(std::span<const double> values, std::span<const double> integrals) {
  if (values.size() != integrals.size()) throw std::invalid_argument("pairing size mismatch");
  // Neumaier-compensated sum; pairings of zero-mean functions cancel heavily.
  double s = 0.0;
  double c = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double t = values[k] * integrals[k];
    const double u = s + t;
    c += std::abs(s) >= std::abs(t) ? (s - u) + t : (t - u) + s;
    s = u;
  }
  return s + c;
}

double lebesgue_integral(const GridDensity& dens, const PointFunction& psi) {
  return pair(dens.values(), cell_integrals(psi, dens.grid()));
}

void write_density_csv(std::ostream& os, const GridDensity& dens) {
  os << "cell_left,cell_right,value\n";
  const auto& g = dens.grid();
  for (int k = 0; k < g.size(); ++k) {
    os << csv::num(g.left(k)) << ',' << csv::num(g.right(k)) << ',' << csv::num(dens[k]) << '\n';
  }
}

GridDensity read_density_csv(std::istream& is) {
  const auto rows = csv::read(is, {"cell_left", "cell_right", "value"});
  if (rows.empty()) throw std::invalid_argument("density CSV has no rows");
  std::vector<double> edges;
  std::vector<double> vals;
  edges.reserve(rows.size() + 1);
  vals.reserve(rows.size());
  edges.push_back(rows.front()[0]);
  for (const auto& r : rows) {
    if (r[0] != edges.back()) throw std::invalid_argument("density CSV cells are not contiguous");
    edges.push_back(r[1]);
    vals.push_back(r[2]);
  }
  auto grid = std::make_shared<const NonuniformGrid>(NonuniformGrid::from_edges(std::move(edges)));
  return GridDensity(std::move(grid), std::move(vals));
}

}  // namespace intermittent
