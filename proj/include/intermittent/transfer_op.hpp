#pragma once

#include <Eigen/SparseCore>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "intermittent/discretization.hpp"
#include "intermittent/map_family.hpp"

namespace intermittent {

enum class OperatorKind { kFullL, kBranchN, kAveraging, kOther };

/// Ulam discretization of a transfer operator. Entry (j <- k) is the
/// fraction of source cell k carried into target cell j, so columns of a
/// full transfer operator sum to one. Acting on cell averages,
///   (apply phi)_j = (1 / w_j) sum_k weight(j <- k) phi_k w_k.
class UlamMatrix {
 public:
  using Storage = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

  UlamMatrix(GridPtr grid, Storage weights, OperatorKind kind, int branch = 0);

  const NonuniformGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Storage& weights() const { return weights_; }
  OperatorKind kind() const { return kind_; }
  /// Branch index for kBranchN, 0 otherwise.
  int branch() const { return branch_; }

  GridDensity apply(const GridDensity& phi) const;
  /// In-place variant on raw cell values; `scratch` is resized as needed.
  void apply_values(const std::vector<double>& in, std::vector<double>& out,
                    std::vector<double>& scratch) const;
  /// Sum of weights in each source column.
  std::vector<double> column_sums() const;
  /// Matrix acting directly on cell averages: D^{-1} W D with D = diag(widths).
  Storage action_matrix() const;

  UlamMatrix operator+(const UlamMatrix& other) const;

 private:
  GridPtr grid_;
  Storage weights_;
  OperatorKind kind_;
  int branch_ = 0;
};

/// Ulam matrix of the full transfer operator L, computed exactly from
/// inverse-branch images of the cell edges.
UlamMatrix assemble_L(const CircleMapFamily& map, const GridPtr& grid);
/// Ulam matrix of the branch operator N_i.
UlamMatrix assemble_N(const CircleMapFamily& map, BranchId i, const GridPtr& grid);

/// Preimages g_i(e_j) of every grid edge under branch i.
std::vector<double> preimage_edges(const CircleMapFamily& map, BranchId i,
                                   const NonuniformGrid& grid);

enum class DensityMethod { kPower, kDirect };

struct DensitySolverConfig {
  DensityMethod method = DensityMethod::kDirect;
  double tol_fix = 1e-10;
  long max_iter = 1'000'000;
};

struct DensityResult {
  GridDensity density;
  bool converged = false;
  long iterations = 0;
  /// ||L h - h||_1 of the returned density.
  double residual = 0.0;
  /// True when the power iteration stalled and a Cesaro average was returned.
  bool cesaro = false;
};

/// Invariant density of an assembled L.
DensityResult invariant_density(const UlamMatrix& L, const DensitySolverConfig& cfg = {});
/// Assembles L and solves for the invariant density.
DensityResult invariant_density(const CircleMapFamily& map, const GridPtr& grid,
                                const DensitySolverConfig& cfg = {});

/// Cell-overlap realization of the local average (1/2eps) int_{B_eps(x)} phi on the circle.
UlamMatrix averaging_operator(double eps, const GridPtr& grid);
/// Pointwise value (1/2eps) int_{x-eps}^{x+eps} phi for a cell function phi.
double averaging_at(const GridDensity& phi, double eps, double x);

/// P_eps = L^{n_eps} A_eps.
class PerturbedOperator {
 public:
  PerturbedOperator(const UlamMatrix& L, double eps, int n_eps);

  GridDensity apply(const GridDensity& phi) const;
  const UlamMatrix& averaging() const { return averaging_; }
  double eps() const { return eps_; }
  int n_eps() const { return n_eps_; }

 private:
  const UlamMatrix* L_;
  UlamMatrix averaging_;
  double eps_;
  int n_eps_;
};

struct KernelMinResult {
  /// Minimum of the discrete kernel at the selected n_eps (0 if never positive).
  double gamma = 0.0;
  int n_eps = 0;
  bool positive = false;
  /// Kernel minimum for n = 1..cap.
  std::vector<double> gamma_by_n;
};

/// Minimum over (target cell, source cell) of the discrete kernel
/// K_jk = (L^n A_eps e_k)_j / w_k, scanned for n = 1..cap; the selected
/// n_eps is the smallest n with a positive minimum. cap <= 0 selects
/// ceil(8 eps^{-alpha}).
KernelMinResult kernel_min(const UlamMatrix& L, double alpha, double eps, int cap = 0);

/// Triplet CSV row,col,weight.
void write_matrix_csv(std::ostream& os, const UlamMatrix& mat);

}  // namespace intermittent
