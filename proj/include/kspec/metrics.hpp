#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

#include "kspec/dataset.hpp"

namespace kspec::metrics {

/// `count` evenly spaced points over [min - 2 std, max + 2 std] of a 1-D sample.
Eigen::VectorXd test_grid(const Points& sample, int count = 200);

/// Per-pair errors E(h, g) = sqrt(sum_j (truth(j, h) - est(j, g))^2); inputs are grid x k.
Eigen::MatrixXd pairwise_l2(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& est);

struct MseResult {
  double value = 0.0;
  std::vector<int> matching;  ///< matching[h] = estimated component paired with true h
};

/// min over permutations eta of sum_h pi_h sqrt(sum_j (p(x_j|h) - p^(x_j|eta(h)))^2).
MseResult mse_metric(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& est, const Eigen::VectorXd& pi);

/// Views share one permutation; the per-view weighted errors are averaged over views.
MseResult mse_metric(const std::array<Eigen::MatrixXd, kNumViews>& truth,
                     const std::array<Eigen::MatrixXd, kNumViews>& est, const Eigen::VectorXd& pi);

/// Micro-averaged F1 after Hungarian matching of predicted to true clusters. Labels in [0, k).
double fscore(const std::vector<int>& truth, const std::vector<int>& predicted, int k);

}  // namespace kspec::metrics
