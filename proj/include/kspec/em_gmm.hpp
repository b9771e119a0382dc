#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

#include "kspec/dataset.hpp"
#include "kspec/recovery.hpp"

namespace kspec::em {

struct EmOptions {
  int k = 1;
  int restarts = 10;
  double tol = 1e-8;     ///< stop when the mean log-likelihood gains less than this
  int max_iters = 500;
  std::uint64_t seed = 0;
};

/// Multi-view Gaussian mixture with diagonal covariances; views independent given the component.
class GaussianMixture final : public recovery::MultiViewModel {
 public:
  Eigen::VectorXd pi;                                ///< k
  std::array<Eigen::MatrixXd, kNumViews> means;      ///< k x d_v
  std::array<Eigen::MatrixXd, kNumViews> variances;  ///< k x d_v

  int k() const override { return static_cast<int>(pi.size()); }
  const Eigen::VectorXd& weights() const override { return pi; }
  Eigen::MatrixXd view_density(int view, const Points& X) const override;

  /// Row i, column h: log pi_h + sum_v log N(x_v^i | h).
  Eigen::MatrixXd joint_log_density(const MultiViewDataset& data) const;
  /// Mean over samples of log sum_h exp(joint_log_density).
  double mean_log_likelihood(const MultiViewDataset& data) const;
};

struct EmRun {
  GaussianMixture model;
  std::vector<double> loglik_history;  ///< mean log-likelihood after each E-step since the last reseed
  int iterations = 0;
  int reseeds = 0;
  bool converged = false;
  double loglik() const { return loglik_history.empty() ? -1e300 : loglik_history.back(); }
};

struct EmResult {
  std::vector<EmRun> runs;
  int best = 0;
  const EmRun& best_run() const { return runs.at(static_cast<size_t>(best)); }
  const GaussianMixture& model() const { return best_run().model; }
};

/// Best-likelihood run out of `restarts` EM runs from k-means++ seeds.
EmResult em_gmm(const MultiViewDataset& data, const EmOptions& opt);

}  // namespace kspec::em
