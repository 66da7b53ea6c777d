#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace intermittent {

/// Raised when a function is evaluated at a point outside its smooth domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when an iterative solver fails to meet its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters selecting one member of a family of degree-d circle maps
/// with a neutral fixed point at 0 ~ 1.
struct MapParams {
  double alpha = 0.0;
  int d = 2;
  std::vector<double> branch_endpoints{0.0, 0.5, 1.0};

  /// The two-branch map x(1 + (2x)^alpha) on [0,1/2), x - (2(1-x))^alpha (1-x) on [1/2,1).
  static MapParams two_branch(double alpha);

  void validate() const;
};

/// 1-based branch index. Branches 1 and d are the neutral ones.
struct BranchId {
  int index = 1;
};

/// Inverse-branch solver tolerances (absolute residual, iteration cap).
inline constexpr double kInverseTolerance = 1e-14;
inline constexpr int kInverseMaxIterations = 200;

/// Interface for a circle-map family. Concrete families implement the
/// per-branch primitives; everything else (reduction mod 1, inverse
/// branches, perturbation fields and their derivatives) is derived here.
///
/// Branch functions are "unreduced": branch i maps its closed interval
/// monotonically onto [0, 1].
class CircleMapFamily {
 public:
  explicit CircleMapFamily(MapParams params);
  virtual ~CircleMapFamily() = default;

  const MapParams& params() const { return params_; }
  double alpha() const { return params_.alpha; }
  int branch_count() const { return params_.d; }
  double branch_left(int branch) const { return params_.branch_endpoints[branch - 1]; }
  double branch_right(int branch) const { return params_.branch_endpoints[branch]; }

  /// Branch containing x in [0,1): branch i owns [e_{i-1}, e_i).
  int branch_of(double x) const;

  // Per-branch primitives.
  virtual double branch_value(int branch, double x) const = 0;
  /// x-derivative of order 1..3 of the branch function.
  virtual double branch_deriv(int branch, double x, int order) const = 0;
  /// x-derivative of order 0..3 of v = d/dalpha of the branch function.
  virtual double branch_dalpha(int branch, double x, int order) const = 0;
  /// Second alpha-derivative of the branch function.
  virtual double branch_dalpha2(int branch, double x) const = 0;
  /// Whether f(1 - x) = 1 - f(x) (mod 1), with branch i mirrored to d + 1 - i.
  virtual bool reflection_symmetric() const { return false; }
  /// Same family at another parameter value.
  virtual std::unique_ptr<CircleMapFamily> with_alpha(double alpha) const = 0;

  // Derived operations.

  /// f(x) mod 1 for x in [0,1).
  double f(double x) const;
  /// Analytic x-derivative of f. Orders >= 2 throw DomainError at non-smooth
  /// branch endpoints.
  double deriv(double x, int order) const;
  /// v(x) = d/dalpha f(x).
  double v(double x) const;
  /// Inverse of branch i: the unique point of the closed branch interval
  /// mapped to y in [0,1].
  double inverse(BranchId i, double y) const;
  /// X_i(x) = v(g_i(x)) and its x-derivatives up to order 3, for x in (0,1).
  double X(BranchId i, double x, int order = 0) const;
  /// d/dalpha g_i(x) = -X_i(x) / f'(g_i(x)).
  double dalpha_inverse(BranchId i, double x) const;
  /// d/dalpha X_i(x) = (d/dalpha v)(g_i(x)) + v'(g_i(x)) d/dalpha g_i(x).
  double dalpha_X(BranchId i, double x) const;
  /// Derivative g_i'(x) = 1 / f'(g_i(x)).
  double inverse_deriv(BranchId i, double x) const;

 protected:
  bool is_breakpoint(double x) const;

 private:
  MapParams params_;
};

/// The two-branch family; alpha in [0,1). At alpha = 0 it is the doubling map.
class TwoBranchIntermittentMap final : public CircleMapFamily {
 public:
  explicit TwoBranchIntermittentMap(double alpha);

  double branch_value(int branch, double x) const override;
  double branch_deriv(int branch, double x, int order) const override;
  double branch_dalpha(int branch, double x, int order) const override;
  double branch_dalpha2(int branch, double x) const override;
  bool reflection_symmetric() const override { return true; }
  std::unique_ptr<CircleMapFamily> with_alpha(double alpha) const override;
};

/// Builds the concrete family for the given parameters.
std::unique_ptr<CircleMapFamily> make_map(const MapParams& params);

/// Preimage sequences accumulating at the neutral fixed point:
/// f(z_{n+1}) = z_n on branch 1 and the mirror sequence on branch d,
/// the latter stored as distances to 1.
struct PartitionSequences {
  std::vector<double> z;
  std::vector<double> z_prime;
};

/// z[0] = z0 and N_z further preimages. When z0 <= 0 the default
/// z0 = g_1(e_1) (the preimage of the first branch endpoint) is used.
PartitionSequences partition_sequences(const CircleMapFamily& map, int n_z, double z0 = -1.0);

/// Measured envelope constant max |X^{(k)}(x)| / (x^{alpha+1-k} (1 + |ln x|))
/// over log-spaced samples of [x_lo, x_hi].
double x_envelope_constant(const CircleMapFamily& map, BranchId i, int order, double x_lo,
                           double x_hi, int samples = 400);

}  // namespace intermittent
