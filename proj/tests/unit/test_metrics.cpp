#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "kspec/errors.hpp"
#include "kspec/matching.hpp"
#include "kspec/metrics.hpp"

using namespace kspec;

namespace {

Eigen::MatrixXd random_matrix(int r, int c, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd M(r, c);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = u(rng);
  return M;
}

// Exhaustive permutation search: the oracle for every matching-based quantity.
template <typename Score>
std::pair<double, std::vector<int>> best_permutation(int k, Score score, bool maximize) {
  std::vector<int> perm(static_cast<size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  double best = maximize ? -1e300 : 1e300;
  std::vector<int> arg;
  do {
    const double s = score(perm);
    if (maximize ? s > best : s < best) {
      best = s;
      arg = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {best, arg};
}

// Micro precision and recall of predicted clusters mapped to true ones by `perm`.
std::pair<double, double> micro_pr(const std::vector<int>& truth, const std::vector<int>& pred,
                                   const std::vector<int>& perm) {
  // perm[t] = predicted cluster paired with true cluster t
  double tp = 0, fp = 0, fn = 0;
  const int k = static_cast<int>(perm.size());
  for (int t = 0; t < k; ++t) {
    const int p = perm[static_cast<size_t>(t)];
    for (size_t i = 0; i < truth.size(); ++i) {
      const bool in_t = truth[i] == t, in_p = pred[i] == p;
      tp += in_t && in_p;
      fp += !in_t && in_p;
      fn += in_t && !in_p;
    }
  }
  return {tp / (tp + fp), tp / (tp + fn)};
}

double brute_fscore(const std::vector<int>& truth, const std::vector<int>& pred, int k) {
  return best_permutation(k, [&](const std::vector<int>& perm) {
           const auto [p, r] = micro_pr(truth, pred, perm);
           return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
         }, true).first;
}

}  // namespace

TEST(Hungarian, MatchesBruteForceMinimum) {
  for (int n = 1; n <= 6; ++n) {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      const Eigen::MatrixXd C = random_matrix(n, n, 31 * n + seed, -2.0, 5.0);
      const auto assign = matching::hungarian(C);
      double total = 0.0;
      std::vector<int> seen(static_cast<size_t>(n), 0);
      for (int r = 0; r < n; ++r) {
        total += C(r, assign[static_cast<size_t>(r)]);
        ++seen[static_cast<size_t>(assign[static_cast<size_t>(r)])];
      }
      for (int s : seen) EXPECT_EQ(s, 1);
      const double oracle = best_permutation(n, [&](const std::vector<int>& p) {
                              double t = 0;
                              for (int r = 0; r < n; ++r) t += C(r, p[static_cast<size_t>(r)]);
                              return t;
                            }, false).first;
      EXPECT_NEAR(total, oracle, 1e-12);
    }
  }
}

TEST(Hungarian, MaximizeVariant) {
  Eigen::Matrix3d W;
  W << 1, 9, 2, 8, 1, 1, 1, 1, 7;
  EXPECT_EQ(matching::hungarian_max(W), (std::vector<int>{1, 0, 2}));
  EXPECT_THROW(matching::hungarian(Eigen::MatrixXd::Zero(2, 3)), InputError);
}

TEST(TestGrid, SpansSampleWithMargin) {
  Points x(4, 1);
  x << 1, 2, 3, 6;  // mean 3, population sd sqrt(3.5)
  const Eigen::VectorXd g = metrics::test_grid(x, 200);
  ASSERT_EQ(g.size(), 200);
  EXPECT_NEAR(g(0), 1 - 2 * std::sqrt(3.5), 1e-12);
  EXPECT_NEAR(g(199), 6 + 2 * std::sqrt(3.5), 1e-12);
  EXPECT_NEAR(g(1) - g(0), g(199) - g(198), 1e-12);
  EXPECT_THROW(metrics::test_grid(Points::Zero(5, 2)), InputError);
}

TEST(MseMetric, ExactEstimateScoresZero) {
  const Eigen::MatrixXd p = random_matrix(200, 3, 1);
  EXPECT_EQ(metrics::mse_metric(p, p, Eigen::Vector3d(0.2, 0.3, 0.5)).value, 0.0);
}

TEST(MseMetric, ConstantOffsetSingleComponent) {
  const Eigen::MatrixXd p = random_matrix(50, 1, 2);
  const double delta = 0.03;
  const Eigen::MatrixXd q = p.array() + delta;
  EXPECT_NEAR(metrics::mse_metric(p, q, Eigen::VectorXd::Ones(1)).value, delta * std::sqrt(50.0), 1e-12);
}

TEST(MseMetric, SwappedLabelsScoreZero) {
  const Eigen::MatrixXd p = random_matrix(100, 2, 3);
  Eigen::MatrixXd q(100, 2);
  q << p.col(1), p.col(0);
  const auto r = metrics::mse_metric(p, q, Eigen::Vector2d(1.0 / 3, 2.0 / 3));
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.matching, (std::vector<int>{1, 0}));
}

TEST(MseMetric, MinimumOverPermutationsWithTrueWeights) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const int k = 4;
    const Eigen::MatrixXd p = random_matrix(30, k, 100 + seed), q = random_matrix(30, k, 200 + seed);
    const Eigen::Vector4d pi(0.1, 0.2, 0.3, 0.4);
    const double oracle = best_permutation(k, [&](const std::vector<int>& eta) {
                            double s = 0;
                            for (int h = 0; h < k; ++h) s += pi(h) * (p.col(h) - q.col(eta[static_cast<size_t>(h)])).norm();
                            return s;
                          }, false).first;
    EXPECT_NEAR(metrics::mse_metric(p, q, pi).value, oracle, 1e-12);
  }
}

TEST(MseMetric, InvariantToRelabelingEstimate) {
  const Eigen::MatrixXd p = random_matrix(40, 3, 4), q = random_matrix(40, 3, 5);
  const Eigen::Vector3d pi(0.5, 0.3, 0.2);
  const double base = metrics::mse_metric(p, q, pi).value;
  std::vector<int> perm = {0, 1, 2};
  while (std::next_permutation(perm.begin(), perm.end())) {
    Eigen::MatrixXd qp(40, 3);
    for (int h = 0; h < 3; ++h) qp.col(h) = q.col(perm[static_cast<size_t>(h)]);
    EXPECT_NEAR(metrics::mse_metric(p, qp, pi).value, base, 1e-14);
  }
}

TEST(MseMetric, ViewsShareOnePermutation) {
  std::array<Eigen::MatrixXd, kNumViews> t, e;
  for (int v = 0; v < kNumViews; ++v) {
    t[static_cast<size_t>(v)] = random_matrix(20, 2, 10 + v);
    e[static_cast<size_t>(v)] = random_matrix(20, 2, 20 + v);
  }
  const Eigen::Vector2d pi(0.4, 0.6);
  const double oracle = best_permutation(2, [&](const std::vector<int>& eta) {
                          double s = 0;
                          for (int v = 0; v < kNumViews; ++v)
                            for (int h = 0; h < 2; ++h)
                              s += pi(h) * (t[static_cast<size_t>(v)].col(h) - e[static_cast<size_t>(v)].col(eta[static_cast<size_t>(h)])).norm();
                          return s / kNumViews;
                        }, false).first;
  EXPECT_NEAR(metrics::mse_metric(t, e, pi).value, oracle, 1e-12);
}

TEST(MseMetric, ShapeMismatchThrows) {
  EXPECT_THROW(metrics::mse_metric(random_matrix(10, 2, 1), random_matrix(11, 2, 2), Eigen::Vector2d(0.5, 0.5)), InputError);
  EXPECT_THROW(metrics::mse_metric(random_matrix(10, 2, 1), random_matrix(10, 2, 2), Eigen::Vector3d(0.2, 0.3, 0.5)), InputError);
}

TEST(Fscore, PerfectAndPermutedPredictions) {
  const std::vector<int> truth = {0, 0, 1, 2, 2, 1, 0};
  EXPECT_EQ(metrics::fscore(truth, truth, 3), 1.0);
  std::vector<int> perm(truth.size());
  std::transform(truth.begin(), truth.end(), perm.begin(), [](int l) { return (l + 1) % 3; });
  EXPECT_EQ(metrics::fscore(truth, perm, 3), 1.0);
}

TEST(Fscore, AllOnesAgainstBalancedClusters) {
  const std::vector<int> truth = {0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  const std::vector<int> pred(10, 1);
  const double oracle = brute_fscore(truth, pred, 2);
  EXPECT_DOUBLE_EQ(oracle, 0.5);
  EXPECT_DOUBLE_EQ(metrics::fscore(truth, pred, 2), oracle);
}

TEST(Fscore, MatchesBruteForceOnRandomLabels) {
  std::mt19937_64 rng(6);
  for (int k = 2; k <= 5; ++k) {
    std::uniform_int_distribution<int> lab(0, k - 1);
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<int> t(40), p(40);
      for (int i = 0; i < 40; ++i) {
        t[static_cast<size_t>(i)] = lab(rng);
        p[static_cast<size_t>(i)] = rng() % 3 == 0 ? lab(rng) : (t[static_cast<size_t>(i)] + 1) % k;
      }
      const double f = metrics::fscore(t, p, k);
      EXPECT_NEAR(f, brute_fscore(t, p, k), 1e-12);
      EXPECT_GE(f, 0.0);
      EXPECT_LE(f, 1.0);
    }
  }
}

TEST(Fscore, RejectsBadLabels) {
  EXPECT_THROW(metrics::fscore({0, 1}, {0, 2}, 2), InputError);
  EXPECT_THROW(metrics::fscore({0, -1}, {0, 1}, 2), InputError);
  EXPECT_THROW(metrics::fscore({0, 1}, {0}, 2), InputError);
}
