#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

#include "kspec/dataset.hpp"
#include "kspec/kernel.hpp"
#include "kspec/spectral.hpp"
#include "kspec/tensor_power.hpp"

namespace kspec::recovery {

/// Eigenvalues at or below this are treated as a vanished component.
inline constexpr double kLambdaFloor = 1e-10;
/// Recovered weights below this raise ComponentDegeneracyError instead of being renormalized away.
inline constexpr double kFloorWeight = 1e-8;
/// Lower clamp for per-view densities inside MAP products and held-out log scores.
inline constexpr double kDensityFloor = 1e-12;

/// Mixing weights plus conditional embeddings mu_h = sum_j coeffs(j, h) phi(basis_j).
struct MixtureEstimate {
  Eigen::VectorXd weights;   ///< k, nonnegative, sums to 1
  Eigen::MatrixXd coeffs;    ///< n_b x k
  kernel::KernelSpec spec;
  Points basis_points;       ///< n_b x d
  std::uint64_t train_checksum = 0;

  int k() const { return static_cast<int>(weights.size()); }
  Eigen::Index dim() const { return basis_points.cols(); }

  /// Throws InputError on shape mismatch or non-finite entries.
  void validate() const;

  /// Reorders components: new component h is old component perm[h].
  MixtureEstimate permuted(const std::vector<int>& perm) const;
};

/// pi_h = lambda_h^{-2} (normalized), coeffs(:, h) = lambda_h B S^{1/2} phi_h.
MixtureEstimate recover_parameters(const spectral::WhiteningBasis& basis,
                                   const tensor::EigenPairs& pairs);

/// <phi(x), mu_h>, unclipped.
double eval_conditional_density(const MixtureEstimate& est, int h, const PointRef& x);

/// Row i, column h: <phi(X_i), mu_h>, unclipped.
Eigen::MatrixXd embedding_values(const MixtureEstimate& est, const Points& X);

/// Embedding values rescaled by the kernel's normalizer, so they integrate like a density over
/// R^d (a probability table under the delta kernel). Unclipped.
Eigen::MatrixXd density_values(const MixtureEstimate& est, const Points& X);

/// max(density, 0).
Eigen::MatrixXd clipped_density_values(const MixtureEstimate& est, const Points& X);

/// Anything that provides mixing weights and per-view conditional densities.
class MultiViewModel {
 public:
  virtual ~MultiViewModel() = default;
  virtual int k() const = 0;
  virtual const Eigen::VectorXd& weights() const = 0;
  /// Row i, column h: p(X_i | h) for the given view, unclipped.
  virtual Eigen::MatrixXd view_density(int view, const Points& X) const = 0;
};

/// One kernel estimate per view sharing a component labelling.
class KernelMixtureModel final : public MultiViewModel {
 public:
  KernelMixtureModel() = default;
  KernelMixtureModel(std::array<MixtureEstimate, kNumViews> views, Eigen::VectorXd weights);

  int k() const override { return static_cast<int>(weights_.size()); }
  const Eigen::VectorXd& weights() const override { return weights_; }
  Eigen::MatrixXd view_density(int view, const Points& X) const override;

  const MixtureEstimate& view(int v) const { return views_.at(static_cast<size_t>(v)); }

 private:
  std::array<MixtureEstimate, kNumViews> views_;
  Eigen::VectorXd weights_;
};

/// Row i, column h: pi_h * prod_v max(p(x_v^i | h), kDensityFloor).
Eigen::MatrixXd assignment_scores(const MultiViewModel& model, const MultiViewDataset& data);

/// MAP component per row (0-based); ties go to the lowest index.
std::vector<int> map_assign(const MultiViewModel& model, const MultiViewDataset& data);

/// Posterior responsibilities, rows normalized (uniform when every score is zero).
Eigen::MatrixXd responsibilities(const Eigen::MatrixXd& scores);

}  // namespace kspec::recovery
