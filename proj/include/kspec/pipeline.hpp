#pragma once

#include <array>
#include <vector>

#include "kspec/dataset.hpp"
#include "kspec/kernel.hpp"
#include "kspec/recovery.hpp"
#include "kspec/tensor_power.hpp"

namespace kspec::pipeline {

/// Incomplete Cholesky settings for the feature maps.
struct LowRankOptions {
  double rel_tol = 1e-6;          ///< residual trace per point
  Eigen::Index max_rank = 300;
};

struct ViewDiagnostics {
  double sigma_k = 0.0;           ///< smallest kept whitening eigenvalue
  double residual = 0.0;          ///< ||T - sum lambda phi^3||
  double cross_condition = 1.0;   ///< conditioning of the projected view-1/2 moment (1 if unused)
  Eigen::Index feature_rank = 0;
};

struct KernelFit {
  recovery::KernelMixtureModel model;
  std::array<ViewDiagnostics, kNumViews> diagnostics{};

  double sigma_k() const;
  double residual() const;
};

/// All three views share their conditional laws: one whitening of the stacked (view 1, view 2)
/// sample, one estimate reused for every view. Uses low-rank features.
KernelFit fit_symmetric(const MultiViewDataset& data, const kernel::KernelSpec& spec, int k,
                        const tensor::PowerConfig& power, const LowRankOptions& low_rank = {});

/// Same estimator on dense Grams: Cholesky-based kernel SVD of the 2m x 2m stacked Gram.
/// Intended for small m.
KernelFit fit_symmetric_dense(const MultiViewDataset& data, const kernel::KernelSpec& spec, int k,
                              const tensor::PowerConfig& power);

/// Views with different conditional laws: each view is recovered by symmetrizing it against the
/// other two, then component labels are aligned to view 1.
KernelFit fit_multiview(const MultiViewDataset& data,
                        const std::array<kernel::KernelSpec, kNumViews>& specs, int k,
                        const tensor::PowerConfig& power, const LowRankOptions& low_rank = {});

/// Core of fit_multiview on precomputed feature maps (one per view, built on all rows of data),
/// restricted to the given sample rows. Lets cross-validation reuse factorizations across folds.
KernelFit fit_multiview(const MultiViewDataset& data,
                        const std::array<const kernel::FeatureMap*, kNumViews>& maps,
                        const std::vector<Eigen::Index>& rows, int k,
                        const tensor::PowerConfig& power);

/// Reorders per-view components to agree with view 1 by matching training-sample posterior
/// co-occurrence. Returns perm[v][h] = original index of aligned component h in view v.
std::array<std::vector<int>, kNumViews> align_components(
    const std::array<recovery::MixtureEstimate, kNumViews>& views,
    const std::array<Points, kNumViews>& train);

}  // namespace kspec::pipeline
