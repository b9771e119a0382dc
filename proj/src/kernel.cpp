#include "kspec/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kspec/errors.hpp"

namespace kspec::kernel {

std::string to_string(Family family) {
  switch (family) {
    case Family::GaussianRBF: return "rbf";
    case Family::Laplace: return "laplace";
    case Family::KroneckerDelta: return "delta";
  }
  return "unknown";
}

Family family_from_string(const std::string& name) {
  if (name == "rbf" || name == "gaussian") return Family::GaussianRBF;
  if (name == "laplace") return Family::Laplace;
  if (name == "delta") return Family::KroneckerDelta;
  throw InputError("unknown kernel family '" + name + "'");
}

void KernelSpec::validate() const {
  if (family != Family::KroneckerDelta && !(bandwidth > 0.0 && std::isfinite(bandwidth))) {
    throw InputError("kernel bandwidth must be positive and finite");
  }
}

double eval_kernel(const KernelSpec& spec, const PointRef& x, const PointRef& y) {
  if (x.size() != y.size()) {
    throw InputError("kernel arguments differ in dimension (" + std::to_string(x.size()) +
                     " vs " + std::to_string(y.size()) + ")");
  }
  switch (spec.family) {
    case Family::GaussianRBF:
      return std::exp(-spec.bandwidth * (x - y).squaredNorm());
    case Family::Laplace:
      return std::exp(-spec.bandwidth * (x - y).norm());
    case Family::KroneckerDelta:
      return (x.array() == y.array()).all() ? 1.0 : 0.0;
  }
  return 0.0;
}

Eigen::VectorXd kernel_column(const KernelSpec& spec, const Points& X, const PointRef& y) {
  if (X.cols() != y.size()) {
    throw InputError("kernel arguments differ in dimension (" + std::to_string(X.cols()) +
                     " vs " + std::to_string(y.size()) + ")");
  }
  switch (spec.family) {
    case Family::GaussianRBF:
      return (-spec.bandwidth * (X.rowwise() - y).rowwise().squaredNorm().array()).exp();
    case Family::Laplace:
      return (-spec.bandwidth * (X.rowwise() - y).rowwise().norm().array()).exp();
    case Family::KroneckerDelta: {
      Eigen::VectorXd out(X.rows());
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        out(i) = (X.row(i).array() == y.array()).all() ? 1.0 : 0.0;
      }
      return out;
    }
  }
  return {};
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Points& X, const Points& Y) {
  if (X.rows() == 0 || Y.rows() == 0) throw InputError("gram_matrix: empty sample");
  if (X.cols() != Y.cols()) throw InputError("gram_matrix: samples differ in dimension");
  Eigen::MatrixXd K(X.rows(), Y.rows());
  for (Eigen::Index j = 0; j < Y.rows(); ++j) K.col(j) = kernel_column(spec, X, Y.row(j));
  return K;
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Points& X) {
  Eigen::MatrixXd K = gram_matrix(spec, X, X);
  // Each entry is computed independently; mirror to make symmetry exact.
  K.triangularView<Eigen::StrictlyLower>() = K.transpose().triangularView<Eigen::StrictlyLower>();
  return K;
}

double kernel_normalizer(const KernelSpec& spec, int dim) {
  const double d = dim;
  switch (spec.family) {
    case Family::GaussianRBF:
      return std::pow(spec.bandwidth / std::numbers::pi, d / 2.0);
    case Family::Laplace: {
      // integral of exp(-s|x|) over R^d = 2 pi^{d/2} Gamma(d) / (Gamma(d/2) s^d)
      const double mass = 2.0 * std::pow(std::numbers::pi, d / 2.0) * std::tgamma(d) /
                          (std::tgamma(d / 2.0) * std::pow(spec.bandwidth, d));
      return 1.0 / mass;
    }
    case Family::KroneckerDelta:
      return 1.0;
  }
  return 1.0;
}

namespace {

// Greedy pivoted Cholesky. `column(p)` returns column p of the (implicit) matrix.
template <typename ColumnFn>
LowRankFactor pivoted_factor(Eigen::VectorXd diag, ColumnFn&& column, double tol,
                             Eigen::Index max_rank) {
  const Eigen::Index n = diag.size();
  if (!(tol >= 0.0)) throw InputError("incomplete_cholesky: tol must be non-negative");
  const Eigen::Index cap = max_rank < 0 ? n : std::min(max_rank, n);
  const double trace = diag.sum();
  const double neg_tol = -kPsdTolerance * std::max(trace, 1.0);

  LowRankFactor out;
  out.factor.resize(n, cap);
  double residual = trace;
  out.residual_history.push_back(residual);

  Eigen::Index r = 0;
  while (r < cap && residual > tol) {
    Eigen::Index p = 0;
    const double pivot = diag.maxCoeff(&p);
    if (pivot <= 0.0) break;
    const double root = std::sqrt(pivot);

    Eigen::VectorXd col = column(p);
    if (r > 0) col.noalias() -= out.factor.leftCols(r) * out.factor.row(p).head(r).transpose();
    col /= root;
    for (Eigen::Index q : out.pivot_order) col(q) = 0.0;
    col(p) = root;
    out.factor.col(r) = col;

    diag -= col.cwiseAbs2();
    diag(p) = 0.0;
    for (Eigen::Index q : out.pivot_order) diag(q) = 0.0;
    if (diag.minCoeff() < neg_tol) {
      throw NumericalError("incomplete_cholesky: matrix is not positive semidefinite");
    }
    diag = diag.cwiseMax(0.0);

    out.pivot_order.push_back(p);
    residual = diag.sum();
    out.residual_history.push_back(residual);
    ++r;
  }
  out.factor.conservativeResize(n, r);
  out.residual_bound = residual;
  return out;
}

}  // namespace

LowRankFactor incomplete_cholesky(const KernelSpec& spec, const Points& X, double tol,
                                  Eigen::Index max_rank) {
  if (X.rows() == 0) throw InputError("incomplete_cholesky: empty sample");
  spec.validate();
  Eigen::VectorXd diag(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) diag(i) = eval_kernel(spec, X.row(i), X.row(i));
  return pivoted_factor(
      std::move(diag), [&](Eigen::Index p) { return kernel_column(spec, X, X.row(p)); }, tol,
      max_rank);
}

LowRankFactor pivoted_cholesky(const Eigen::MatrixXd& K, double tol, Eigen::Index max_rank) {
  if (K.rows() == 0 || K.rows() != K.cols()) {
    throw InputError("pivoted_cholesky: expected a non-empty square matrix");
  }
  return pivoted_factor(
      K.diagonal(), [&](Eigen::Index p) { return Eigen::VectorXd(K.col(p)); }, tol, max_rank);
}

double median_heuristic(const Points& X) {
  const Eigen::Index n = X.rows();
  if (n < 2) throw InputError("median_heuristic: need at least two points");
  std::vector<double> dists;
  dists.reserve(static_cast<size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) dists.push_back((X.row(i) - X.row(j)).norm());
  }
  const size_t mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
  double median = dists[mid];
  if (dists.size() % 2 == 0) {
    const double lower = *std::max_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  if (!(median > 0.0)) throw InputError("median_heuristic: median pairwise distance is zero");
  return 1.0 / (2.0 * median * median);
}

FeatureMap::FeatureMap(KernelSpec spec, const Points& sample, LowRankFactor factor)
    : spec_(spec), factor_(std::move(factor)) {
  const Eigen::Index r = factor_.rank();
  pivot_points_.resize(r, sample.cols());
  pivot_block_.resize(r, r);
  for (Eigen::Index j = 0; j < r; ++j) {
    const Eigen::Index p = factor_.pivot_order[static_cast<size_t>(j)];
    pivot_points_.row(j) = sample.row(p);
    pivot_block_.row(j) = factor_.factor.row(p);
  }
  pivot_block_.triangularView<Eigen::StrictlyUpper>().setZero();
}

FeatureMap FeatureMap::build(const KernelSpec& spec, const Points& sample, double rel_tol,
                             Eigen::Index max_rank) {
  auto factor = incomplete_cholesky(spec, sample, rel_tol * static_cast<double>(sample.rows()),
                                    max_rank);
  return FeatureMap(spec, sample, std::move(factor));
}

Eigen::MatrixXd FeatureMap::features(const Points& X) const {
  if (X.cols() != pivot_points_.cols()) throw InputError("FeatureMap: dimension mismatch");
  if (rank() == 0) return Eigen::MatrixXd::Zero(X.rows(), 0);
  Eigen::MatrixXd G = gram_matrix(spec_, pivot_points_, X);  // r x n
  pivot_block_.triangularView<Eigen::Lower>().solveInPlace(G);
  return G.transpose();
}

Eigen::MatrixXd FeatureMap::expansion_coefficients(const Eigen::MatrixXd& coords) const {
  if (coords.rows() != rank()) throw InputError("FeatureMap: coordinate rank mismatch");
  Eigen::MatrixXd a = coords;
  pivot_block_.transpose().triangularView<Eigen::Upper>().solveInPlace(a);
  return a;
}

}  // namespace kspec::kernel
