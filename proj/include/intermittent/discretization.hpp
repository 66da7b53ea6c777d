#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace intermittent {

/// Smallest admissible cell width.
inline constexpr double kMinCellWidth = 1e-12;
/// Gauss-Legendre nodes per cell used by projection and integration.
inline constexpr int kCellQuadratureOrder = 5;

/// Partition of the circle [0,1) refined geometrically toward the neutral
/// point 0 ~ 1. The grid is mirror symmetric: edges[M - k] == 1 - edges[k]
/// holds exactly in floating point.
class NonuniformGrid {
 public:
  /// Builds a grid of m_total cells: n_geometric cells at each end whose
  /// widths shrink by refinement_ratio toward 0 (resp. 1), the smallest
  /// being w * ratio^n_geometric for the interior cell width w, and
  /// m_total - 2 n_geometric uniform interior cells.
  static NonuniformGrid build(int m_total, double refinement_ratio, int n_geometric);
  /// Grid from explicit edges (must start at 0, end at 1, strictly increase).
  static NonuniformGrid from_edges(std::vector<double> edges);

  int size() const { return static_cast<int>(edges_.size()) - 1; }
  const std::vector<double>& edges() const { return edges_; }
  double left(int k) const { return edges_[k]; }
  double right(int k) const { return edges_[k + 1]; }
  double width(int k) const { return widths_[k]; }
  const std::vector<double>& widths() const { return widths_; }
  double center(int k) const { return 0.5 * (edges_[k] + edges_[k + 1]); }
  double min_width() const;
  double refinement_ratio() const { return ratio_; }
  int n_geometric() const { return n_geometric_; }
  bool mirror_symmetric() const { return symmetric_; }

  /// Index of the cell containing x in [0,1); x == 1 maps to the last cell.
  int locate(double x) const;
  /// Short descriptor used in reports.
  std::string describe() const;

  bool operator==(const NonuniformGrid& other) const { return edges_ == other.edges_; }

 private:
  NonuniformGrid(std::vector<double> edges, double ratio, int n_geometric);

  std::vector<double> edges_;
  std::vector<double> widths_;
  double ratio_ = 1.0;
  int n_geometric_ = 0;
  bool symmetric_ = false;
};

using GridPtr = std::shared_ptr<const NonuniformGrid>;
using PointFunction = std::function<double(double)>;

/// Cell-average representation of a function on a grid. Densities are
/// nonnegative; signed cell functions (source terms, differences) share
/// the same representation.
class GridDensity {
 public:
  GridDensity() = default;
  GridDensity(GridPtr grid, std::vector<double> values);
  /// Constant function c.
  static GridDensity constant(GridPtr grid, double c);

  const NonuniformGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double operator[](int k) const { return values_[k]; }
  int size() const { return static_cast<int>(values_.size()); }

  /// Sum of value * width.
  double mass() const;
  /// Sum of |value| * width.
  double l1_norm() const;
  bool is_nonnegative() const;
  /// Rescales to unit mass; throws if the mass is not positive.
  GridDensity& normalize();

  GridDensity& operator+=(const GridDensity& other);
  GridDensity& operator-=(const GridDensity& other);
  GridDensity& operator*=(double s);

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

GridDensity operator+(GridDensity a, const GridDensity& b);
GridDensity operator-(GridDensity a, const GridDensity& b);
GridDensity operator*(double s, GridDensity a);

/// Gauss-Legendre rule on [-1,1] of the order used per cell.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const QuadratureRule& gauss_legendre(int order = kCellQuadratureOrder);

/// Integral of fn over [a,b] by the per-cell rule (open nodes only).
double integrate_cell(const PointFunction& fn, double a, double b);

/// Cell averages of fn.
GridDensity project(const PointFunction& fn, const GridPtr& grid);

/// Sum over cells of value * integral of psi over the cell.
double lebesgue_integral(const GridDensity& dens, const PointFunction& psi);

/// Cell integrals of psi, reusable for repeated pairings against densities.
std::vector<double> cell_integrals(const PointFunction& psi, const NonuniformGrid& grid);
/// Pairing sum_k values[k] * integrals[k].
double pair(std::span<const double> values, std::span<const double> integrals);

/// CSV with header cell_left,cell_right,value and 17 significant digits.
void write_density_csv(std::ostream& os, const GridDensity& dens);
/// Reads a density CSV, reconstructing the grid from the cell edges.
GridDensity read_density_csv(std::istream& is);

}  // namespace intermittent
