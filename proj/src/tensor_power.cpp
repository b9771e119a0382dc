#include "kspec/tensor_power.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "kspec/errors.hpp"
#include "kspec/rng.hpp"

namespace kspec::tensor {

namespace {

constexpr double kZeroUpdate = 1e-300;

// T~(I, theta, theta) for the tensor deflated by the found pairs that pass the xi test.
class DeflatedTensor {
 public:
  DeflatedTensor(const WhitenedTensor& T, const std::vector<double>& lambdas,
                 const std::vector<Eigen::VectorXd>& vectors, double xi)
      : T_(T), lambdas_(lambdas), vectors_(vectors), xi_(xi) {}

  Eigen::VectorXd apply(const Eigen::VectorXd& theta) const {
    Eigen::VectorXd v = tensor_apply(T_, theta);
    for (size_t j = 0; j < lambdas_.size(); ++j) {
      const double proj = vectors_[j].dot(theta);
      if (std::abs(lambdas_[j] * proj) > xi_) v.noalias() -= lambdas_[j] * proj * proj * vectors_[j];
    }
    return v;
  }

  double value(const Eigen::VectorXd& theta) const { return theta.dot(apply(theta)); }

 private:
  const WhitenedTensor& T_;
  const std::vector<double>& lambdas_;
  const std::vector<Eigen::VectorXd>& vectors_;
  double xi_;
};

// N normalized power updates in place; false if an update collapses to zero.
bool iterate(const DeflatedTensor& T, Eigen::VectorXd& theta, int steps) {
  for (int t = 0; t < steps; ++t) {
    Eigen::VectorXd next = T.apply(theta);
    const double nrm = next.norm();
    if (!(nrm >= kZeroUpdate) || !std::isfinite(nrm)) return false;
    theta = next / nrm;
  }
  return true;
}

Eigen::VectorXd random_unit(int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd u(k);
  do {
    for (int i = 0; i < k; ++i) u(i) = normal(rng);
  } while (u.norm() == 0.0);
  return u / u.norm();
}

}  // namespace

PowerConfig PowerConfig::defaults(int k, std::uint64_t seed) {
  PowerConfig cfg;
  const double kk = static_cast<double>(k);
  cfg.num_inits = std::max(10, static_cast<int>(std::ceil(kk * kk * std::log(kk + 1.0))));
  cfg.num_iters = 100;
  cfg.deflation_threshold = 0.0;
  cfg.seed = seed;
  return cfg;
}

void PowerConfig::validate() const {
  if (num_inits < 1) throw InputError("PowerConfig: numInits must be >= 1");
  if (num_iters < 1) throw InputError("PowerConfig: numIters must be >= 1");
  if (!(deflation_threshold >= 0.0)) throw InputError("PowerConfig: deflation threshold must be >= 0");
}

Eigen::VectorXd tensor_apply(const WhitenedTensor& T, const Eigen::VectorXd& u) {
  const int k = T.dim();
  if (u.size() != k) throw InputError("tensor_apply: vector length does not match tensor");
  Eigen::VectorXd v(k);
  const double* e = T.entries().data();
  for (int a = 0; a < k; ++a) {
    double s = 0.0;
    for (int b = 0; b < k; ++b) {
      const double* row = e + (static_cast<size_t>(a) * k + b) * k;
      double inner = 0.0;
      for (int c = 0; c < k; ++c) inner += row[c] * u(c);
      s += u(b) * inner;
    }
    v(a) = s;
  }
  return v;
}

double tensor_value(const WhitenedTensor& T, const Eigen::VectorXd& u) {
  return u.dot(tensor_apply(T, u));
}

EigenPairs tensor_eigen(const WhitenedTensor& T, const PowerConfig& cfg) {
  cfg.validate();
  const int k = T.dim();
  if (k < 1) throw InputError("tensor_eigen: empty tensor");
  for (double v : T.entries()) {
    if (!std::isfinite(v)) throw InputError("tensor_eigen: tensor has non-finite entries");
  }

  std::vector<double> lambdas;
  std::vector<Eigen::VectorXd> vectors;
  EigenPairs out;

  for (int i = 0; i < k; ++i) {
    const DeflatedTensor deflated(T, lambdas, vectors, cfg.deflation_threshold);
    RoundTrace trace;
    std::vector<Eigen::VectorXd> finals(static_cast<size_t>(cfg.num_inits));
    for (int tau = 0; tau < cfg.num_inits; ++tau) {
      Eigen::VectorXd theta = random_unit(k, derive_seed(cfg.seed, {static_cast<std::uint64_t>(i),
                                                                   static_cast<std::uint64_t>(tau)}));
      double score = -std::numeric_limits<double>::infinity();
      if (iterate(deflated, theta, cfg.num_iters)) score = deflated.value(theta);
      trace.trial_scores.push_back(score);
      finals[static_cast<size_t>(tau)] = std::move(theta);
    }
    const auto best = std::max_element(trace.trial_scores.begin(), trace.trial_scores.end());
    if (!std::isfinite(*best)) {
      throw DegenerateTensorError("tensor_eigen: every restart collapsed in round " + std::to_string(i));
    }
    trace.selected = static_cast<int>(best - trace.trial_scores.begin());

    Eigen::VectorXd phi = finals[static_cast<size_t>(trace.selected)];
    if (!iterate(deflated, phi, cfg.num_iters)) {
      throw DegenerateTensorError("tensor_eigen: refinement collapsed in round " + std::to_string(i));
    }
    double lambda = deflated.value(phi);
    if (lambda < 0.0) {
      phi = -phi;
      lambda = -lambda;
    }
    lambdas.push_back(lambda);
    vectors.push_back(phi);
    out.rounds.push_back(std::move(trace));
  }

  std::vector<int> order(static_cast<size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return lambdas[static_cast<size_t>(a)] > lambdas[static_cast<size_t>(b)]; });
  out.lambdas.resize(k);
  out.vectors.resize(k, k);
  for (int j = 0; j < k; ++j) {
    out.lambdas(j) = lambdas[static_cast<size_t>(order[static_cast<size_t>(j)])];
    out.vectors.col(j) = vectors[static_cast<size_t>(order[static_cast<size_t>(j)])];
  }
  return out;
}

double residual_norm(const WhitenedTensor& T, const EigenPairs& pairs) {
  WhitenedTensor R = T;
  if (pairs.k() > 0) {
    if (pairs.vectors.rows() != T.dim()) throw InputError("residual_norm: dimension mismatch");
    R -= WhitenedTensor::from_components(pairs.lambdas, pairs.vectors);
  }
  return R.norm();
}

}  // namespace kspec::tensor
