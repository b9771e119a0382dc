#include "kspec/metrics.hpp"

#include <cmath>

#include "kspec/errors.hpp"
#include "kspec/matching.hpp"

namespace kspec::metrics {

Eigen::VectorXd test_grid(const Points& sample, int count) {
  if (sample.cols() != 1) throw InputError("test_grid: only 1-D views have a density grid");
  if (sample.rows() < 1) throw InputError("test_grid: empty sample");
  if (count < 2) throw InputError("test_grid: need at least 2 grid points");
  const Eigen::VectorXd x = sample.col(0);
  const double mean = x.mean();
  const double sd = std::sqrt((x.array() - mean).square().mean());
  const double lo = x.minCoeff() - 2.0 * sd;
  const double hi = x.maxCoeff() + 2.0 * sd;
  return Eigen::VectorXd::LinSpaced(count, lo, hi);
}

Eigen::MatrixXd pairwise_l2(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& est) {
  if (truth.rows() != est.rows() || truth.cols() != est.cols()) {
    throw InputError("mse_metric: grid sizes or component counts disagree");
  }
  const Eigen::Index k = truth.cols();
  Eigen::MatrixXd E(k, k);
  for (Eigen::Index h = 0; h < k; ++h) {
    for (Eigen::Index g = 0; g < k; ++g) E(h, g) = (truth.col(h) - est.col(g)).norm();
  }
  return E;
}

namespace {

MseResult match(const Eigen::MatrixXd& cost) {
  MseResult r;
  r.matching = matching::hungarian(cost);
  for (size_t h = 0; h < r.matching.size(); ++h) r.value += cost(static_cast<Eigen::Index>(h), r.matching[h]);
  return r;
}

}  // namespace

MseResult mse_metric(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& est, const Eigen::VectorXd& pi) {
  if (pi.size() != truth.cols()) throw InputError("mse_metric: mixing size mismatch");
  return match(pi.asDiagonal() * pairwise_l2(truth, est));
}

MseResult mse_metric(const std::array<Eigen::MatrixXd, kNumViews>& truth,
                     const std::array<Eigen::MatrixXd, kNumViews>& est, const Eigen::VectorXd& pi) {
  const Eigen::Index k = pi.size();
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(k, k);
  for (int v = 0; v < kNumViews; ++v) {
    const auto uv = static_cast<size_t>(v);
    if (truth[uv].cols() != k) throw InputError("mse_metric: mixing size mismatch");
    cost += pi.asDiagonal() * pairwise_l2(truth[uv], est[uv]);
  }
  cost /= static_cast<double>(kNumViews);
  return match(cost);
}

double fscore(const std::vector<int>& truth, const std::vector<int>& predicted, int k) {
  if (truth.size() != predicted.size()) throw InputError("fscore: label vectors differ in length");
  if (k < 1) throw InputError("fscore: k must be >= 1");
  if (truth.empty()) throw InputError("fscore: no labels");
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(k, k);
  for (size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= k || predicted[i] < 0 || predicted[i] >= k) {
      throw InputError("fscore: label outside [0, k)");
    }
    counts(truth[i], predicted[i]) += 1.0;
  }
  const std::vector<int> m = matching::hungarian_max(counts);
  // Each point is predicted exactly once, so micro precision = micro recall = matched / n.
  double matched = 0.0;
  for (int t = 0; t < k; ++t) matched += counts(t, m[static_cast<size_t>(t)]);
  const double precision = matched / static_cast<double>(truth.size());
  const double recall = precision;
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

}  // namespace kspec::metrics
