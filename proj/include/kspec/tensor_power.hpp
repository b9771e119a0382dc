#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "kspec/tensor.hpp"

namespace kspec::tensor {

struct PowerConfig {
  int num_inits = 10;                ///< L random restarts per deflation round
  int num_iters = 100;               ///< N power iterations per restart
  double deflation_threshold = 0.0;  ///< xi; found pair j is deflated when |lambda_j <theta, phi_j>| > xi
  std::uint64_t seed = 0;

  /// L = max(10, ceil(k^2 log(k + 1))), N = 100, xi = 0.
  static PowerConfig defaults(int k, std::uint64_t seed);

  void validate() const;
};

/// Restart bookkeeping for one deflation round.
struct RoundTrace {
  std::vector<double> trial_scores;  ///< T~(theta_N, theta_N, theta_N); -inf for collapsed trials
  int selected = -1;
};

struct EigenPairs {
  Eigen::VectorXd lambdas;   ///< nonincreasing, >= 0
  Eigen::MatrixXd vectors;   ///< k x k, unit columns
  std::vector<RoundTrace> rounds;  ///< in extraction order

  int k() const { return static_cast<int>(lambdas.size()); }
};

/// v(a) = sum_{b,c} T(a,b,c) u(b) u(c).
Eigen::VectorXd tensor_apply(const WhitenedTensor& T, const Eigen::VectorXd& u);

/// T(u, u, u).
double tensor_value(const WhitenedTensor& T, const Eigen::VectorXd& u);

/// Robust tensor power method with random restarts and thresholded deflation.
/// Deterministic in (T, cfg); restart tau of round i draws from its own (seed, i, tau) stream.
EigenPairs tensor_eigen(const WhitenedTensor& T, const PowerConfig& cfg);

/// || T - sum_j lambda_j phi_j^{(x)3} || (Frobenius).
double residual_norm(const WhitenedTensor& T, const EigenPairs& pairs);

}  // namespace kspec::tensor
