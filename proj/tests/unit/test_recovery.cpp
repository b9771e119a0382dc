#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "kspec/em_gmm.hpp"
#include "kspec/errors.hpp"
#include "kspec/metrics.hpp"
#include "kspec/pipeline.hpp"
#include "kspec/recovery.hpp"
#include "kspec/spectral.hpp"
#include "kspec/synth.hpp"
#include "support/discrete_model.hpp"

using namespace kspec;
using kernel::KernelSpec;
namespace orc = kspec::oracle;

namespace {

recovery::MixtureEstimate population_estimate(const orc::DiscreteModel& model, std::uint64_t seed) {
  const auto pw = spectral::whiten_population(model.pair(0, 1), model.triple(), model.k());
  return recovery::recover_parameters(pw.basis, tensor::tensor_eigen(pw.tensor, tensor::PowerConfig::defaults(model.k(), seed)));
}

spectral::WhiteningBasis toy_basis(int k) {
  spectral::WhiteningBasis b;
  b.eigvals = Eigen::VectorXd::Ones(k);
  b.coeffs = Eigen::MatrixXd::Identity(k, k);
  b.spec = KernelSpec::delta();
  b.basis_points = orc::atoms(k);
  return b;
}

tensor::EigenPairs pairs_with(const Eigen::VectorXd& lambdas) {
  tensor::EigenPairs p;
  p.lambdas = lambdas;
  p.vectors = Eigen::MatrixXd::Identity(lambdas.size(), lambdas.size());
  return p;
}

// A symmetric two-component kernel fit shared by several tests.
struct SymmetricFit {
  synth::SyntheticSpec spec;
  MultiViewDataset data;
  pipeline::KernelFit fit;
};

const SymmetricFit& symmetric_fit() {
  static const SymmetricFit f = [] {
    SymmetricFit s;
    s.spec = synth::preset("sym_gaussian_k2");
    s.spec.m = 3000;
    s.spec.seed = 21;
    s.data = synth::sample_dataset(s.spec);
    const double bw = 16.0 * kernel::median_heuristic(s.data.views[0].topRows(1000));
    s.fit = pipeline::fit_symmetric(s.data, KernelSpec::rbf(bw), 2, tensor::PowerConfig::defaults(2, 5));
    return s;
  }();
  return f;
}

Eigen::MatrixXd true_grid_density(const synth::SyntheticSpec& spec, int view, const Eigen::VectorXd& grid) {
  Eigen::MatrixXd out(grid.size(), spec.k);
  for (int h = 0; h < spec.k; ++h)
    for (Eigen::Index j = 0; j < grid.size(); ++j) out(j, h) = synth::true_density(spec, h, view, grid(j));
  return out;
}

}  // namespace

TEST(RecoverParameters, ExactDiscreteModel) {
  const orc::DiscreteModel model = orc::two_state_model();
  const auto est = population_estimate(model, 1);
  const Eigen::MatrixXd dens = recovery::density_values(est, orc::atoms(3));
  EXPECT_LE(orc::permuted_max_error(model.P[0], dens), 1e-6);
  EXPECT_LE(orc::permuted_max_error(model.pi.transpose(), est.weights.transpose()), 1e-6);
  EXPECT_NEAR(est.weights.sum(), 1.0, 1e-12);
}

TEST(RecoverParameters, DefaultMixingThreeStates) {
  Eigen::MatrixXd P(5, 3);
  P << 0.5, 0.1, 0.1,
       0.2, 0.5, 0.1,
       0.1, 0.2, 0.2,
       0.1, 0.1, 0.3,
       0.1, 0.1, 0.3;
  const orc::DiscreteModel model = orc::DiscreteModel::symmetric(synth::default_mixing(3), P);
  const auto est = population_estimate(model, 2);
  EXPECT_LE(orc::permuted_max_error(P, recovery::density_values(est, orc::atoms(5))), 1e-6);
  EXPECT_LE(orc::permuted_max_error(model.pi.transpose(), est.weights.transpose()), 1e-6);
}

TEST(RecoverParameters, UniformEigenvaluesGiveUniformWeights) {
  const auto est = recovery::recover_parameters(toy_basis(2), pairs_with(Eigen::Vector2d(std::sqrt(2.0), std::sqrt(2.0))));
  EXPECT_NEAR(est.weights(0), 0.5, 1e-15);
  EXPECT_NEAR(est.weights(1), 0.5, 1e-15);
}

TEST(RecoverParameters, CoefficientsScaleWithLambda) {
  // B = I, S = I, phi = e_h: coefficient column h is lambda_h e_h.
  const auto est = recovery::recover_parameters(toy_basis(2), pairs_with(Eigen::Vector2d(2.0, 3.0)));
  EXPECT_NEAR(est.coeffs(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(est.coeffs(1, 1), 3.0, 1e-15);
  EXPECT_NEAR(est.weights(0), (1.0 / 4) / (1.0 / 4 + 1.0 / 9), 1e-15);
}

TEST(RecoverParameters, VanishingEigenvalueIsReported) {
  EXPECT_THROW(recovery::recover_parameters(toy_basis(2), pairs_with(Eigen::Vector2d(1.0, 0.0))),
               ComponentDegeneracyError);
  // lambda = 1e5 means a weight near 1e-10, below the floor.
  EXPECT_THROW(recovery::recover_parameters(toy_basis(2), pairs_with(Eigen::Vector2d(1.0, 1e5))),
               ComponentDegeneracyError);
}

TEST(RecoverParameters, MismatchedPairsRejected) {
  EXPECT_THROW(recovery::recover_parameters(toy_basis(2), pairs_with(Eigen::Vector3d(1, 1, 1))), InputError);
}

TEST(RecoverParameters, SingleComponentOnRankOneData) {
  MultiViewDataset d;
  for (auto& v : d.views) v = Points::Constant(10, 1, 4.0);
  const KernelSpec delta = KernelSpec::delta();
  const auto basis = spectral::kernel_svd(spectral::stack_pair_grams(delta, d), 1);
  const auto pairs = tensor::tensor_eigen(spectral::whitened_tensor(basis, delta, d), tensor::PowerConfig::defaults(1, 0));
  const auto est = recovery::recover_parameters(basis, pairs);
  EXPECT_EQ(est.weights(0), 1.0);
  // The mean embedding is phi(4).
  Points q(2, 1);
  q << 4.0, 3.0;
  const Eigen::MatrixXd e = recovery::embedding_values(est, q);
  EXPECT_NEAR(e(0, 0), 1.0, 1e-8);
  EXPECT_NEAR(e(1, 0), 0.0, 1e-8);
}

TEST(EvalConditionalDensity, SingleSampleEmbedding) {
  MultiViewDataset d;
  d.views[0] = Points::Constant(1, 1, 0.0);
  d.views[1] = Points::Constant(1, 1, 0.7);
  d.views[2] = Points::Constant(1, 1, 0.0);
  const KernelSpec spec = KernelSpec::rbf(0.8);
  const auto basis = spectral::kernel_svd(spectral::stack_pair_grams(spec, d), 1);
  const auto pairs = tensor::tensor_eigen(spectral::whitened_tensor(basis, spec, d), tensor::PowerConfig::defaults(1, 0));
  const auto est = recovery::recover_parameters(basis, pairs);
  for (double x : {-1.0, 0.0, 0.35, 2.0}) {
    Eigen::RowVectorXd p(1);
    p << x;
    const double expected = 0.5 * (std::exp(-0.8 * x * x) + std::exp(-0.8 * (x - 0.7) * (x - 0.7)));
    EXPECT_NEAR(recovery::eval_conditional_density(est, 0, p), expected, 1e-10);
  }
}

TEST(EvalConditionalDensity, DiscreteTableEntries) {
  const orc::DiscreteModel model = orc::two_state_model();
  const auto est = population_estimate(model, 3);
  const int h0 = std::abs(est.weights(0) - 1.0 / 3.0) < 1e-6 ? 0 : 1;
  for (int s = 0; s < 3; ++s) {
    Eigen::RowVectorXd p(1);
    p << s;
    EXPECT_NEAR(recovery::eval_conditional_density(est, h0, p), model.P[0](s, 0), 1e-6);
    EXPECT_NEAR(recovery::eval_conditional_density(est, 1 - h0, p), model.P[0](s, 1), 1e-6);
  }
}

TEST(EvalConditionalDensity, FarFieldDecays) {
  const auto& est = symmetric_fit().fit.model.view(0);
  Eigen::RowVectorXd far(1);
  far << 1e4;
  EXPECT_NEAR(recovery::eval_conditional_density(est, 0, far), 0.0, 1e-300);
  EXPECT_THROW(recovery::eval_conditional_density(est, 2, far), InputError);
  EXPECT_THROW(recovery::eval_conditional_density(est, -1, far), InputError);
}

TEST(DensityValues, ClippedIsNonnegativeAndNormalized) {
  const auto& est = symmetric_fit().fit.model.view(0);
  const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(4001, -20.0, 20.0);
  const Eigen::MatrixXd raw = recovery::density_values(est, grid);
  const Eigen::MatrixXd clipped = recovery::clipped_density_values(est, grid);
  EXPECT_GE(clipped.minCoeff(), 0.0);
  EXPECT_EQ(clipped, raw.cwiseMax(0.0));
  const double dx = grid(1) - grid(0);
  for (int h = 0; h < 2; ++h) {
    const double mass = clipped.col(h).sum() * dx;
    EXPECT_GE(mass, 0.7);
    EXPECT_LE(mass, 1.3);
  }
}

TEST(MixtureEstimate, PermutationConsistency) {
  const auto& sf = symmetric_fit();
  const std::vector<int> perm = {1, 0};
  std::array<recovery::MixtureEstimate, kNumViews> views;
  for (int v = 0; v < kNumViews; ++v) views[static_cast<size_t>(v)] = sf.fit.model.view(v).permuted(perm);
  const Eigen::Vector2d w(sf.fit.model.weights()(1), sf.fit.model.weights()(0));
  const recovery::KernelMixtureModel swapped(views, w);
  const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(50, -5.0, 8.0);
  const Eigen::MatrixXd a = sf.fit.model.view_density(1, grid), b = swapped.view_density(1, grid);
  EXPECT_EQ(a.col(0), b.col(1));
  EXPECT_EQ(a.col(1), b.col(0));
  const auto la = recovery::map_assign(sf.fit.model, sf.data);
  const auto lb = recovery::map_assign(swapped, sf.data);
  for (size_t i = 0; i < la.size(); ++i) EXPECT_EQ(lb[i], 1 - la[i]);
  EXPECT_THROW(sf.fit.model.view(0).permuted({0, 0, 1}), InputError);
}

TEST(MapAssign, ComponentCentersAgreeWithTruePosterior) {
  const auto& sf = symmetric_fit();
  const Eigen::VectorXd grid = metrics::test_grid(sf.data.views[0]);
  const auto match = metrics::mse_metric(true_grid_density(sf.spec, 0, grid),
                                         sf.fit.model.view_density(0, grid), sf.spec.mixing).matching;
  for (int h = 0; h < 2; ++h) {
    MultiViewDataset center;
    for (int v = 0; v < kNumViews; ++v) {
      center.views[static_cast<size_t>(v)] = Points::Constant(1, 1, sf.spec.components[static_cast<size_t>(h)].views[static_cast<size_t>(v)].mean);
    }
    // Oracle: posterior argmax under the generating densities.
    int truth = 0;
    double best = -1.0;
    for (int g = 0; g < 2; ++g) {
      double s = sf.spec.mixing(g);
      for (int v = 0; v < kNumViews; ++v) s *= synth::true_density(sf.spec, g, v, center.views[static_cast<size_t>(v)](0, 0));
      if (s > best) {
        best = s;
        truth = g;
      }
    }
    ASSERT_EQ(truth, h);
    EXPECT_EQ(recovery::map_assign(sf.fit.model, center)[0], match[static_cast<size_t>(h)]);
  }
}

TEST(MapAssign, SingleComponentAlwaysFirstLabel) {
  em::GaussianMixture g;
  g.pi = Eigen::VectorXd::Ones(1);
  for (int v = 0; v < kNumViews; ++v) {
    g.means[static_cast<size_t>(v)] = Eigen::MatrixXd::Zero(1, 1);
    g.variances[static_cast<size_t>(v)] = Eigen::MatrixXd::Ones(1, 1);
  }
  const auto d = synth::sample_dataset([] {
    auto s = synth::preset("gaussian_k2");
    s.m = 50;
    s.seed = 1;
    return s;
  }());
  for (int label : recovery::map_assign(g, d)) EXPECT_EQ(label, 0);
}

TEST(MapAssign, InvariantToWeightScaling) {
  const auto& sf = symmetric_fit();
  const auto base = recovery::map_assign(sf.fit.model, sf.data);
  std::array<recovery::MixtureEstimate, kNumViews> views;
  for (int v = 0; v < kNumViews; ++v) views[static_cast<size_t>(v)] = sf.fit.model.view(v);
  const recovery::KernelMixtureModel scaled(views, 7.5 * sf.fit.model.weights());
  EXPECT_EQ(recovery::map_assign(scaled, sf.data), base);
}

TEST(MapAssign, TiesGoToLowestIndex) {
  em::GaussianMixture g;
  g.pi = Eigen::Vector2d(0.5, 0.5);
  for (int v = 0; v < kNumViews; ++v) {
    g.means[static_cast<size_t>(v)] = Eigen::MatrixXd::Zero(2, 1);
    g.variances[static_cast<size_t>(v)] = Eigen::MatrixXd::Ones(2, 1);
  }
  MultiViewDataset d;
  for (auto& v : d.views) v = Points::Zero(3, 1);
  for (int label : recovery::map_assign(g, d)) EXPECT_EQ(label, 0);
}

TEST(AssignmentScores, ProductOfFlooredDensities) {
  const auto& sf = symmetric_fit();
  const MultiViewDataset few = sf.data.subset({0, 1, 2});
  const Eigen::MatrixXd scores = recovery::assignment_scores(sf.fit.model, few);
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (int h = 0; h < 2; ++h) {
      double s = sf.fit.model.weights()(h);
      for (int v = 0; v < kNumViews; ++v) {
        s *= std::max(sf.fit.model.view_density(v, few.views[static_cast<size_t>(v)])(i, h), recovery::kDensityFloor);
      }
      EXPECT_NEAR(scores(i, h), s, 1e-12 * std::max(1.0, s));
    }
  }
}

TEST(Responsibilities, RowsNormalized) {
  Eigen::MatrixXd s(3, 2);
  s << 1, 3, 0, 0, 2e-30, 0;
  const Eigen::MatrixXd r = recovery::responsibilities(s);
  EXPECT_DOUBLE_EQ(r(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(r(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(r(1, 1), 0.5);
  EXPECT_DOUBLE_EQ(r(2, 0), 1.0);
}

TEST(MixtureEstimate, ValidateCatchesShapeAndNaN) {
  recovery::MixtureEstimate e;
  e.weights = Eigen::Vector2d(0.5, 0.5);
  e.coeffs = Eigen::MatrixXd::Zero(3, 2);
  e.basis_points = Points::Zero(3, 1);
  EXPECT_NO_THROW(e.validate());
  e.coeffs(0, 0) = std::nan("");
  EXPECT_THROW(e.validate(), InputError);
  e.coeffs = Eigen::MatrixXd::Zero(2, 2);
  EXPECT_THROW(e.validate(), InputError);
}

TEST(KernelMixtureModel, ComponentCountsMustAgree) {
  const auto& m = symmetric_fit().fit.model;
  std::array<recovery::MixtureEstimate, kNumViews> views{m.view(0), m.view(1), m.view(2)};
  EXPECT_THROW(recovery::KernelMixtureModel(views, Eigen::Vector3d(0.2, 0.3, 0.5)), InputError);
}
