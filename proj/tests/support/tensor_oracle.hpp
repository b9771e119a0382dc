#pragma once

// Synthetic orthogonally decomposable tensors and eigenvector matching.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "kspec/tensor.hpp"

namespace kspec::oracle {

inline Eigen::MatrixXd random_orthogonal(int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd A(k, k);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  return qr.householderQ() * Eigen::MatrixXd::Identity(k, k);
}

inline WhitenedTensor random_tensor(int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  WhitenedTensor T(k);
  for (double& x : T.entries()) x = g(rng);
  return T;
}

// Fully symmetric noise with Frobenius norm eps.
inline WhitenedTensor symmetric_noise(int k, double eps, std::uint64_t seed) {
  const WhitenedTensor R = random_tensor(k, seed);
  WhitenedTensor E(k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      for (int c = 0; c < k; ++c)
        E(a, b, c) = (R(a, b, c) + R(a, c, b) + R(b, a, c) + R(b, c, a) + R(c, a, b) + R(c, b, a)) / 6.0;
  E *= eps / E.norm();
  return E;
}

// For each true column h, the recovered column (up to sign) it is matched to.
inline std::vector<int> match_columns(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& est) {
  const int k = static_cast<int>(truth.cols());
  std::vector<int> perm(static_cast<size_t>(k)), best;
  std::iota(perm.begin(), perm.end(), 0);
  double best_err = 1e300;
  do {
    double err = 0.0;
    for (int h = 0; h < k; ++h) err += std::abs(std::abs(truth.col(h).dot(est.col(perm[static_cast<size_t>(h)]))) - 1.0);
    if (err < best_err) {
      best_err = err;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace kspec::oracle
