#include "kspec/pipeline.hpp"

#include <algorithm>
#include <numeric>

#include "kspec/errors.hpp"
#include "kspec/matching.hpp"
#include "kspec/rng.hpp"
#include "kspec/spectral.hpp"

namespace kspec::pipeline {

namespace {

tensor::PowerConfig view_power(const tensor::PowerConfig& power, int view) {
  tensor::PowerConfig cfg = power;
  cfg.seed = derive_seed(power.seed, {static_cast<std::uint64_t>(view)});
  return cfg;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& M, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), M.cols());
  for (size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = M.row(rows[i]);
  return out;
}

KernelFit shared_estimate(recovery::MixtureEstimate est, const ViewDiagnostics& diag) {
  KernelFit fit;
  Eigen::VectorXd w = est.weights;
  fit.model = recovery::KernelMixtureModel({est, est, est}, std::move(w));
  fit.diagnostics = {diag, diag, diag};
  return fit;
}

}  // namespace

double KernelFit::sigma_k() const {
  double s = diagnostics[0].sigma_k;
  for (const auto& d : diagnostics) s = std::min(s, d.sigma_k);
  return s;
}

double KernelFit::residual() const {
  double r = 0.0;
  for (const auto& d : diagnostics) r = std::max(r, d.residual);
  return r;
}

KernelFit fit_symmetric(const MultiViewDataset& data, const kernel::KernelSpec& spec, int k,
                        const tensor::PowerConfig& power, const LowRankOptions& low_rank) {
  data.validate();
  const Eigen::Index m = data.size();
  if (m < 1) throw InputError("fit_symmetric: empty dataset");
  Points stacked(2 * m, data.views[0].cols());
  stacked << data.views[0], data.views[1];
  const kernel::FeatureMap map = kernel::FeatureMap::build(spec, stacked, low_rank.rel_tol, low_rank.max_rank);
  const Eigen::MatrixXd& F = map.sample_features();
  const Eigen::MatrixXd F1 = F.topRows(m);
  const Eigen::MatrixXd F2 = F.bottomRows(m);
  const Eigen::MatrixXd F3 = map.features(data.views[2]);
  const Eigen::VectorXd w = spectral::uniform_weights(m);

  const spectral::CoordinateWhitening cw = spectral::whiten_pair(F1, F2, w, k);
  const Eigen::MatrixXd W = cw.whitening();
  const WhitenedTensor T = spectral::cyclic_tensor(F1 * W, F2 * W, F3 * W, w);
  const tensor::EigenPairs pairs = tensor::tensor_eigen(T, power);

  ViewDiagnostics diag;
  diag.sigma_k = cw.eigvals.minCoeff();
  diag.residual = tensor::residual_norm(T, pairs);
  diag.feature_rank = map.rank();
  recovery::MixtureEstimate est = recovery::recover_parameters(spectral::to_basis(map, cw), pairs);
  est.train_checksum = checksum(data);
  return shared_estimate(std::move(est), diag);
}

KernelFit fit_symmetric_dense(const MultiViewDataset& data, const kernel::KernelSpec& spec, int k,
                              const tensor::PowerConfig& power) {
  const spectral::StackedPairGrams grams = spectral::stack_pair_grams(spec, data);
  const spectral::WhiteningBasis basis = spectral::kernel_svd(grams, k);
  const WhitenedTensor T = spectral::whitened_tensor(basis, spec, data);
  const tensor::EigenPairs pairs = tensor::tensor_eigen(T, power);

  ViewDiagnostics diag;
  diag.sigma_k = basis.sigma_k();
  diag.residual = tensor::residual_norm(T, pairs);
  diag.feature_rank = grams.K.rows();
  recovery::MixtureEstimate est = recovery::recover_parameters(basis, pairs);
  est.train_checksum = checksum(data);
  return shared_estimate(std::move(est), diag);
}

KernelFit fit_multiview(const MultiViewDataset& data,
                        const std::array<kernel::KernelSpec, kNumViews>& specs, int k,
                        const tensor::PowerConfig& power, const LowRankOptions& low_rank) {
  data.validate();
  std::array<kernel::FeatureMap, kNumViews> maps{
      kernel::FeatureMap::build(specs[0], data.views[0], low_rank.rel_tol, low_rank.max_rank),
      kernel::FeatureMap::build(specs[1], data.views[1], low_rank.rel_tol, low_rank.max_rank),
      kernel::FeatureMap::build(specs[2], data.views[2], low_rank.rel_tol, low_rank.max_rank)};
  std::vector<Eigen::Index> rows(static_cast<size_t>(data.size()));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  return fit_multiview(data, {&maps[0], &maps[1], &maps[2]}, rows, k, power);
}

KernelFit fit_multiview(const MultiViewDataset& data,
                        const std::array<const kernel::FeatureMap*, kNumViews>& maps,
                        const std::vector<Eigen::Index>& rows, int k,
                        const tensor::PowerConfig& power) {
  data.validate();
  if (rows.empty()) throw InputError("fit_multiview: no training rows");
  std::array<Eigen::MatrixXd, kNumViews> F;
  for (int v = 0; v < kNumViews; ++v) {
    if (maps[static_cast<size_t>(v)] == nullptr) throw InputError("fit_multiview: missing feature map");
    if (maps[static_cast<size_t>(v)]->sample_features().rows() != data.size()) {
      throw InputError("fit_multiview: feature map was not built on this dataset");
    }
    F[static_cast<size_t>(v)] = select_rows(maps[static_cast<size_t>(v)]->sample_features(), rows);
  }
  const Eigen::VectorXd w = spectral::uniform_weights(static_cast<Eigen::Index>(rows.size()));

  KernelFit fit;
  std::array<recovery::MixtureEstimate, kNumViews> estimates;
  std::array<Points, kNumViews> train;
  for (int t = 0; t < kNumViews; ++t) {
    const int o1 = t == 0 ? 1 : 0;
    const int o2 = t == 2 ? 1 : 2;
    const auto ut = static_cast<size_t>(t);
    const spectral::SymmetrizedCoordinates sc = spectral::symmetrize_coordinates(
        F[static_cast<size_t>(o1)], F[static_cast<size_t>(o2)], F[ut], w, k);
    const tensor::EigenPairs pairs = tensor::tensor_eigen(sc.tensor, view_power(power, t));
    estimates[ut] = recovery::recover_parameters(spectral::to_basis(*maps[ut], sc.whitening), pairs);
    train[ut] = select_rows(data.views[ut], rows);
    fit.diagnostics[ut].sigma_k = sc.whitening.eigvals.minCoeff();
    fit.diagnostics[ut].residual = tensor::residual_norm(sc.tensor, pairs);
    fit.diagnostics[ut].cross_condition = sc.cross_condition;
    fit.diagnostics[ut].feature_rank = maps[ut]->rank();
  }

  const auto perms = align_components(estimates, train);
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(k);
  for (int v = 0; v < kNumViews; ++v) {
    const auto uv = static_cast<size_t>(v);
    estimates[uv] = estimates[uv].permuted(perms[uv]);
    estimates[uv].train_checksum = checksum(data);
    weights += estimates[uv].weights;
  }
  weights /= weights.sum();
  fit.model = recovery::KernelMixtureModel(std::move(estimates), std::move(weights));
  return fit;
}

std::array<std::vector<int>, kNumViews> align_components(
    const std::array<recovery::MixtureEstimate, kNumViews>& views,
    const std::array<Points, kNumViews>& train) {
  const int k = views[0].k();
  std::array<Eigen::MatrixXd, kNumViews> resp;
  for (int v = 0; v < kNumViews; ++v) {
    const auto uv = static_cast<size_t>(v);
    if (views[uv].k() != k) throw InputError("align_components: component counts disagree");
    if (train[uv].rows() != train[0].rows()) throw InputError("align_components: sample counts disagree");
    Eigen::MatrixXd scores = recovery::density_values(views[uv], train[uv]).cwiseMax(recovery::kDensityFloor);
    scores = scores * views[uv].weights.asDiagonal();
    resp[uv] = recovery::responsibilities(scores);
  }
  std::array<std::vector<int>, kNumViews> perms;
  perms[0].resize(static_cast<size_t>(k));
  std::iota(perms[0].begin(), perms[0].end(), 0);
  for (int v = 1; v < kNumViews; ++v) {
    const auto uv = static_cast<size_t>(v);
    // co(h, g): expected count of samples in reference component h and view-v component g.
    const Eigen::MatrixXd co = resp[0].transpose() * resp[uv];
    perms[uv] = matching::hungarian_max(co);
  }
  return perms;
}

}  // namespace kspec::pipeline
