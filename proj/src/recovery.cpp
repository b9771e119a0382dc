#include "kspec/recovery.hpp"

#include <cmath>
#include <string>

#include "kspec/errors.hpp"

namespace kspec::recovery {

void MixtureEstimate::validate() const {
  spec.validate();
  if (weights.size() < 1) throw InputError("MixtureEstimate: no components");
  if (coeffs.cols() != weights.size() || coeffs.rows() != basis_points.rows()) {
    throw InputError("MixtureEstimate: coefficient shape does not match weights/basis");
  }
  if (!weights.allFinite() || !coeffs.allFinite() || !basis_points.allFinite()) {
    throw InputError("MixtureEstimate: non-finite entries");
  }
}

MixtureEstimate MixtureEstimate::permuted(const std::vector<int>& perm) const {
  if (static_cast<int>(perm.size()) != k()) throw InputError("permuted: permutation size mismatch");
  MixtureEstimate out = *this;
  for (int h = 0; h < k(); ++h) {
    const int src = perm[static_cast<size_t>(h)];
    if (src < 0 || src >= k()) throw InputError("permuted: index out of range");
    out.weights(h) = weights(src);
    out.coeffs.col(h) = coeffs.col(src);
  }
  return out;
}

MixtureEstimate recover_parameters(const spectral::WhiteningBasis& basis,
                                   const tensor::EigenPairs& pairs) {
  const int k = basis.k();
  if (pairs.k() != k || pairs.vectors.rows() != k) {
    throw InputError("recover_parameters: eigenpairs do not match the whitening basis");
  }
  for (int h = 0; h < k; ++h) {
    if (!(pairs.lambdas(h) > kLambdaFloor)) {
      throw ComponentDegeneracyError("recover_parameters: eigenvalue " + std::to_string(h) + " = " +
                                     std::to_string(pairs.lambdas(h)) + " is not positive");
    }
  }
  MixtureEstimate est;
  est.weights = pairs.lambdas.array().square().inverse().matrix();
  est.weights /= est.weights.sum();
  for (int h = 0; h < k; ++h) {
    if (est.weights(h) < kFloorWeight) {
      throw ComponentDegeneracyError("recover_parameters: weight of component " + std::to_string(h) +
                                     " fell below the floor");
    }
  }
  const Eigen::VectorXd sqrt_s = basis.eigvals.cwiseSqrt();
  est.coeffs = basis.coeffs * sqrt_s.asDiagonal() * pairs.vectors * pairs.lambdas.asDiagonal();
  est.spec = basis.spec;
  est.basis_points = basis.basis_points;
  est.train_checksum = checksum(basis.basis_points);
  if (!est.coeffs.allFinite()) throw NumericalError("recover_parameters: non-finite coefficients");
  return est;
}

double eval_conditional_density(const MixtureEstimate& est, int h, const PointRef& x) {
  if (h < 0 || h >= est.k()) throw InputError("eval_conditional_density: component out of range");
  return kernel::kernel_column(est.spec, est.basis_points, x).dot(est.coeffs.col(h));
}

Eigen::MatrixXd embedding_values(const MixtureEstimate& est, const Points& X) {
  if (X.cols() != est.dim()) throw InputError("embedding_values: dimension mismatch");
  // Only basis points with a nonzero coefficient contribute.
  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < est.coeffs.rows(); ++j) {
    if (est.coeffs.row(j).squaredNorm() > 0.0) active.push_back(j);
  }
  Points pts(static_cast<Eigen::Index>(active.size()), est.dim());
  Eigen::MatrixXd C(static_cast<Eigen::Index>(active.size()), est.k());
  for (size_t i = 0; i < active.size(); ++i) {
    pts.row(static_cast<Eigen::Index>(i)) = est.basis_points.row(active[i]);
    C.row(static_cast<Eigen::Index>(i)) = est.coeffs.row(active[i]);
  }
  if (active.empty()) return Eigen::MatrixXd::Zero(X.rows(), est.k());
  return kernel::gram_matrix(est.spec, X, pts) * C;
}

Eigen::MatrixXd density_values(const MixtureEstimate& est, const Points& X) {
  return kernel::kernel_normalizer(est.spec, static_cast<int>(est.dim())) * embedding_values(est, X);
}

Eigen::MatrixXd clipped_density_values(const MixtureEstimate& est, const Points& X) {
  return density_values(est, X).cwiseMax(0.0);
}

KernelMixtureModel::KernelMixtureModel(std::array<MixtureEstimate, kNumViews> views,
                                       Eigen::VectorXd weights)
    : views_(std::move(views)), weights_(std::move(weights)) {
  for (const auto& v : views_) {
    if (v.k() != k()) throw InputError("KernelMixtureModel: component counts disagree");
  }
}

Eigen::MatrixXd KernelMixtureModel::view_density(int view, const Points& X) const {
  return density_values(views_.at(static_cast<size_t>(view)), X);
}

Eigen::MatrixXd assignment_scores(const MultiViewModel& model, const MultiViewDataset& data) {
  data.validate();
  Eigen::MatrixXd scores = Eigen::MatrixXd::Ones(data.size(), model.k());
  for (int v = 0; v < kNumViews; ++v) {
    scores.array() *= model.view_density(v, data.views[static_cast<size_t>(v)]).array().max(kDensityFloor);
  }
  return scores * model.weights().asDiagonal();
}

std::vector<int> map_assign(const MultiViewModel& model, const MultiViewDataset& data) {
  const Eigen::MatrixXd scores = assignment_scores(model, data);
  std::vector<int> labels(static_cast<size_t>(scores.rows()), 0);
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    int best = 0;
    for (int h = 1; h < scores.cols(); ++h) {
      if (scores(i, h) > scores(i, best)) best = h;
    }
    labels[static_cast<size_t>(i)] = best;
  }
  return labels;
}

Eigen::MatrixXd responsibilities(const Eigen::MatrixXd& scores) {
  Eigen::MatrixXd r = scores;
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    const double s = r.row(i).sum();
    if (s > 0.0 && std::isfinite(s)) {
      r.row(i) /= s;
    } else {
      r.row(i).setConstant(1.0 / static_cast<double>(r.cols()));
    }
  }
  return r;
}

}  // namespace kspec::recovery
