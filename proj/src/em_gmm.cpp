#include "kspec/em_gmm.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "kspec/errors.hpp"
#include "kspec/rng.hpp"

namespace kspec::em {

namespace {

constexpr double kVarianceFloorScale = 1e-8;
constexpr double kEmptyCluster = 1e-10;

double log_sum_exp(const Eigen::RowVectorXd& row) {
  const double mx = row.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((row.array() - mx).exp().sum());
}

// Sample variance per column (1/m).
Eigen::RowVectorXd column_variance(const Eigen::MatrixXd& X) {
  const Eigen::RowVectorXd mean = X.colwise().mean();
  return (X.rowwise() - mean).array().square().colwise().mean();
}

Eigen::MatrixXd diag_log_gauss(const Eigen::MatrixXd& X, const Eigen::MatrixXd& means,
                               const Eigen::MatrixXd& vars) {
  const Eigen::Index n = X.rows();
  const Eigen::Index k = means.rows();
  Eigen::MatrixXd out(n, k);
  const double log2pi = std::log(2.0 * std::numbers::pi);
  for (Eigen::Index h = 0; h < k; ++h) {
    const Eigen::RowVectorXd inv = vars.row(h).cwiseInverse();
    const double norm = -0.5 * (vars.row(h).array().log().sum() + static_cast<double>(X.cols()) * log2pi);
    out.col(h) = ((X.rowwise() - means.row(h)).array().square().rowwise() * inv.array())
                     .rowwise().sum().matrix() * -0.5;
    out.col(h).array() += norm;
  }
  return out;
}

struct Workspace {
  const MultiViewDataset& data;
  Eigen::MatrixXd stacked;                      // all views side by side, for seeding
  std::array<Eigen::RowVectorXd, kNumViews> data_var;
  std::array<Eigen::RowVectorXd, kNumViews> var_floor;
};

// k-means++ seeding on the concatenated views.
GaussianMixture seed_model(const Workspace& ws, int k, std::mt19937_64& rng) {
  const Eigen::Index n = ws.stacked.rows();
  std::vector<Eigen::Index> centers;
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centers.push_back(first(rng));
  Eigen::VectorXd d2 = (ws.stacked.rowwise() - ws.stacked.row(centers[0])).rowwise().squaredNorm();
  while (static_cast<int>(centers.size()) < k) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng);
      for (pick = 0; pick < n - 1; ++pick) {
        r -= d2(pick);
        if (r <= 0.0 && d2(pick) > 0.0) break;
      }
    } else {
      pick = first(rng);
    }
    centers.push_back(pick);
    d2 = d2.cwiseMin((ws.stacked.rowwise() - ws.stacked.row(pick)).rowwise().squaredNorm());
  }
  GaussianMixture g;
  g.pi = Eigen::VectorXd::Constant(k, 1.0 / k);
  for (int v = 0; v < kNumViews; ++v) {
    const auto uv = static_cast<size_t>(v);
    const Eigen::MatrixXd& X = ws.data.views[uv];
    g.means[uv].resize(k, X.cols());
    g.variances[uv] = ws.data_var[uv].replicate(k, 1);
    for (int h = 0; h < k; ++h) g.means[uv].row(h) = X.row(centers[static_cast<size_t>(h)]);
  }
  return g;
}

EmRun run_em(const Workspace& ws, const EmOptions& opt, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  EmRun run;
  run.model = seed_model(ws, opt.k, rng);
  GaussianMixture& g = run.model;
  const MultiViewDataset& data = ws.data;
  const Eigen::Index n = data.size();

  for (int it = 0; it < opt.max_iters; ++it) {
    // E-step.
    const Eigen::MatrixXd logp = g.joint_log_density(data);
    Eigen::VectorXd row_norm(n);
    for (Eigen::Index i = 0; i < n; ++i) row_norm(i) = log_sum_exp(logp.row(i));
    const double ll = row_norm.mean();
    if (!std::isfinite(ll)) throw NumericalError("em_gmm: non-finite log-likelihood");
    const bool stop = !run.loglik_history.empty() && ll - run.loglik_history.back() < opt.tol;
    run.loglik_history.push_back(ll);
    run.iterations = it + 1;
    if (stop) {
      run.converged = true;
      break;
    }
    const Eigen::MatrixXd resp = (logp.colwise() - row_norm).array().exp().matrix();

    // M-step.
    const Eigen::RowVectorXd nk = resp.colwise().sum();
    bool reseeded = false;
    for (int h = 0; h < opt.k; ++h) {
      if (nk(h) > kEmptyCluster) continue;
      // Empty component: move it to the worst-explained point.
      Eigen::Index far = 0;
      row_norm.minCoeff(&far);
      for (int v = 0; v < kNumViews; ++v) {
        const auto uv = static_cast<size_t>(v);
        g.means[uv].row(h) = data.views[uv].row(far);
        g.variances[uv].row(h) = ws.data_var[uv];
      }
      g.pi(h) = 1.0 / static_cast<double>(n);
      reseeded = true;
    }
    if (reseeded) {
      g.pi /= g.pi.sum();
      ++run.reseeds;
      run.loglik_history.clear();
      continue;
    }
    g.pi = (nk / static_cast<double>(n)).transpose();
    for (int v = 0; v < kNumViews; ++v) {
      const auto uv = static_cast<size_t>(v);
      const Eigen::MatrixXd& X = data.views[uv];
      for (int h = 0; h < opt.k; ++h) {
        const Eigen::VectorXd r = resp.col(h);
        const Eigen::RowVectorXd mu = (r.transpose() * X) / nk(h);
        const Eigen::RowVectorXd var =
            (r.transpose() * (X.rowwise() - mu).array().square().matrix()) / nk(h);
        g.means[uv].row(h) = mu;
        g.variances[uv].row(h) = var.cwiseMax(ws.var_floor[uv]);
      }
    }
  }
  if (!run.converged) run.loglik_history.push_back(g.mean_log_likelihood(data));
  return run;
}

}  // namespace

Eigen::MatrixXd GaussianMixture::view_density(int view, const Points& X) const {
  const auto uv = static_cast<size_t>(view);
  if (view < 0 || view >= kNumViews) throw InputError("view_density: view out of range");
  if (X.cols() != means[uv].cols()) throw InputError("view_density: dimension mismatch");
  return diag_log_gauss(X, means[uv], variances[uv]).array().exp().matrix();
}

Eigen::MatrixXd GaussianMixture::joint_log_density(const MultiViewDataset& data) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(data.size(), k());
  out.rowwise() += pi.array().log().matrix().transpose();
  for (int v = 0; v < kNumViews; ++v) {
    const auto uv = static_cast<size_t>(v);
    out += diag_log_gauss(data.views[uv], means[uv], variances[uv]);
  }
  return out;
}

double GaussianMixture::mean_log_likelihood(const MultiViewDataset& data) const {
  const Eigen::MatrixXd logp = joint_log_density(data);
  double s = 0.0;
  for (Eigen::Index i = 0; i < logp.rows(); ++i) s += log_sum_exp(logp.row(i));
  return s / static_cast<double>(logp.rows());
}

EmResult em_gmm(const MultiViewDataset& data, const EmOptions& opt) {
  data.validate();
  if (opt.k < 1) throw InputError("em_gmm: k must be >= 1");
  if (opt.restarts < 1 || opt.max_iters < 1) throw InputError("em_gmm: restarts and maxIters must be >= 1");
  if (data.size() < opt.k) throw InputError("em_gmm: fewer samples than components");
  for (const auto& v : data.views) {
    if (!v.allFinite()) throw InputError("em_gmm: non-finite data");
  }

  Workspace ws{data, {}, {}, {}};
  Eigen::Index total_dim = 0;
  for (const auto& v : data.views) total_dim += v.cols();
  ws.stacked.resize(data.size(), total_dim);
  Eigen::Index col = 0;
  for (int v = 0; v < kNumViews; ++v) {
    const auto uv = static_cast<size_t>(v);
    ws.stacked.middleCols(col, data.views[uv].cols()) = data.views[uv];
    col += data.views[uv].cols();
    ws.data_var[uv] = column_variance(data.views[uv]);
    ws.var_floor[uv] = (ws.data_var[uv] * kVarianceFloorScale).cwiseMax(std::numeric_limits<double>::min());
    ws.data_var[uv] = ws.data_var[uv].cwiseMax(ws.var_floor[uv]);
  }

  EmResult result;
  for (int r = 0; r < opt.restarts; ++r) {
    result.runs.push_back(run_em(ws, opt, derive_seed(opt.seed, {static_cast<std::uint64_t>(r)})));
    if (result.runs.back().loglik() > result.runs[static_cast<size_t>(result.best)].loglik()) result.best = r;
  }
  return result;
}

}  // namespace kspec::em
