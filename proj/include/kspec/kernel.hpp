#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace kspec {

/// A sample of points in R^d, one point per row. Discrete data is integer-coded in a single column.
using Points = Eigen::MatrixXd;
/// A single point; accepts rows of a column-major matrix without copying.
using PointRef = Eigen::Ref<const Eigen::RowVectorXd, 0, Eigen::InnerStride<>>;

}  // namespace kspec

namespace kspec::kernel {

enum class Family { GaussianRBF, Laplace, KroneckerDelta };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

/// Kernel family plus scale. RBF is exp(-s |x-y|^2), Laplace exp(-s |x-y|); delta ignores s.
struct KernelSpec {
  Family family = Family::GaussianRBF;
  double bandwidth = 1.0;

  static KernelSpec rbf(double s) { return {Family::GaussianRBF, s}; }
  static KernelSpec laplace(double s) { return {Family::Laplace, s}; }
  static KernelSpec delta() { return {Family::KroneckerDelta, 1.0}; }

  /// Throws InputError when the bandwidth is not positive for a scaled family.
  void validate() const;

  bool operator==(const KernelSpec&) const = default;
};

double eval_kernel(const KernelSpec& spec, const PointRef& x, const PointRef& y);

/// k(X_i, y) for every row of X.
Eigen::VectorXd kernel_column(const KernelSpec& spec, const Points& X, const PointRef& y);

/// Dense Gram matrix, entries(i, j) = k(X_i, Y_j).
Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Points& X, const Points& Y);
Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Points& X);

/// Reciprocal of the integral of k(x, .) over R^d, so that normalizer * <phi(x), mu> is a density.
/// Equals 1 for the delta kernel (counting measure).
double kernel_normalizer(const KernelSpec& spec, int dim);

/// Greedy pivoted Cholesky factor: K ~= factor * factor^T.
struct LowRankFactor {
  Eigen::MatrixXd factor;                ///< n x r
  std::vector<Eigen::Index> pivot_order; ///< row chosen at each step
  double residual_bound = 0.0;           ///< trace of K - factor * factor^T
  std::vector<double> residual_history;  ///< residual trace after 0, 1, ..., r columns

  Eigen::Index rank() const { return factor.cols(); }
};

/// Relative tolerance for declaring a negative residual pivot a numerical failure.
inline constexpr double kPsdTolerance = 1e-10;

/// Pivoted incomplete Cholesky of the Gram matrix of X, evaluating only the columns it pivots on.
/// Stops once the residual trace is <= tol, or at max_rank columns (negative: no cap).
LowRankFactor incomplete_cholesky(const KernelSpec& spec, const Points& X, double tol,
                                  Eigen::Index max_rank = -1);

/// Same factorization for an explicitly materialized symmetric PSD matrix.
LowRankFactor pivoted_cholesky(const Eigen::MatrixXd& K, double tol, Eigen::Index max_rank = -1);

/// s = 1 / (2 median^2) over all pairwise Euclidean distances.
double median_heuristic(const Points& X);

/// Nystrom feature map induced by a pivoted Cholesky factor.
///
/// Every point x gets coordinates f(x) = F_p^{-1} k(pivots, x), where F_p is the (lower
/// triangular) block of the factor on the pivot rows. On the factorized sample these coincide
/// with the factor rows, and <f(x), f(y)> reproduces k(x, y) up to the factor residual.
class FeatureMap {
 public:
  FeatureMap(KernelSpec spec, const Points& sample, LowRankFactor factor);

  /// Factorize `sample` with residual trace <= rel_tol * n.
  static FeatureMap build(const KernelSpec& spec, const Points& sample, double rel_tol,
                          Eigen::Index max_rank = -1);

  const KernelSpec& spec() const { return spec_; }
  Eigen::Index rank() const { return factor_.rank(); }
  Eigen::Index dim() const { return pivot_points_.cols(); }
  const LowRankFactor& factor() const { return factor_; }

  /// Coordinates of the factorized sample (n x r).
  const Eigen::MatrixXd& sample_features() const { return factor_.factor; }
  /// Coordinates of arbitrary points (rows).
  Eigen::MatrixXd features(const Points& X) const;

  /// Turns coordinate vectors (columns of coords, r x k) into kernel-expansion coefficients over
  /// pivot_points(), so that <f(x), c> = sum_j a_j k(pivot_j, x).
  Eigen::MatrixXd expansion_coefficients(const Eigen::MatrixXd& coords) const;

  const Points& pivot_points() const { return pivot_points_; }

 private:
  KernelSpec spec_;
  LowRankFactor factor_;
  Points pivot_points_;
  Eigen::MatrixXd pivot_block_;  // r x r lower triangular
};

}  // namespace kspec::kernel
