#pragma once

#include <Eigen/Dense>

#include <utility>

#include "kspec/dataset.hpp"
#include "kspec/kernel.hpp"
#include "kspec/tensor.hpp"

namespace kspec::spectral {

/// sigma_k <= kRankTolerance * sigma_1 means the k-th direction is numerically absent.
inline constexpr double kRankTolerance = 1e-9;
/// Relative singular-value cutoff for the small cross-view inverses.
inline constexpr double kPinvCutoff = 1e-9;
/// Residual-trace tolerance (relative to the trace) for "complete" Cholesky of a dense Gram.
inline constexpr double kCompleteCholeskyTolerance = 1e-12;

/// Grams of the stacked feature matrices Phi = (phi(x_a), phi(x_b)) and Psi = (phi(x_b), phi(x_a)).
struct StackedPairGrams {
  kernel::KernelSpec spec;
  Points stacked;     ///< 2m points: view a rows, then view b rows
  Eigen::MatrixXd K;  ///< Phi^T Phi
  Eigen::MatrixXd L;  ///< Psi^T Psi (K with its two m-blocks swapped)
  Eigen::Index m = 0;
};

StackedPairGrams stack_pair_grams(const kernel::KernelSpec& spec, const MultiViewDataset& data,
                                  std::pair<int, int> views = {0, 1});

/// Whitening operator W = Phi_b B S^{-1/2} expressed over a set of basis points.
struct WhiteningBasis {
  Eigen::VectorXd eigvals;   ///< sigma_1 >= ... >= sigma_k > 0
  Eigen::MatrixXd coeffs;    ///< n_b x k, columns beta_i with beta_i^T K_b beta_j = delta_ij
  kernel::KernelSpec spec;
  Points basis_points;       ///< n_b x d

  int k() const { return static_cast<int>(eigvals.size()); }
  /// Smallest kept eigenvalue.
  double sigma_k() const { return eigvals.size() ? eigvals(eigvals.size() - 1) : 0.0; }

  /// xi(x) = S^{-1/2} B^T k(basis, x).
  Eigen::VectorXd project(const PointRef& x) const;
  /// Row i is xi(X_i)^T.
  Eigen::MatrixXd project(const Points& X) const;
};

/// Kernel SVD of the symmetrized pair operator (1/2m) Phi Psi^T via K = R^T R and the
/// eigenproblem (1/4m^2) R L R^T b = sigma^2 b.
WhiteningBasis kernel_svd(const StackedPairGrams& grams, int k);

Eigen::VectorXd project_features(const WhiteningBasis& basis, const kernel::KernelSpec& spec,
                                 const PointRef& x);

/// (1/3m) sum_i [xi1 (x) xi2 (x) xi3 + xi3 (x) xi1 (x) xi2 + xi2 (x) xi3 (x) xi1].
WhitenedTensor whitened_tensor(const WhiteningBasis& basis, const kernel::KernelSpec& spec,
                               const MultiViewDataset& data);

struct PopulationWhitening {
  WhiteningBasis basis;  ///< basis points are the n coordinate atoms 0..n-1 under the delta kernel
  WhitenedTensor tensor;
};

/// Whitens explicit population moments: W = U_k S_k^{-1/2}, T = C3 x1 W^T x2 W^T x3 W^T.
PopulationWhitening whiten_population(const Eigen::MatrixXd& C2, const WhitenedTensor& C3, int k);

// ---- coordinate-level building blocks shared by the Gram and low-rank routes ----

/// Uniform weights 1/m.
Eigen::VectorXd uniform_weights(Eigen::Index m);

/// Orthonormal whitening directions in a finite coordinate space.
struct CoordinateWhitening {
  Eigen::MatrixXd directions;  ///< r x k, orthonormal columns
  Eigen::VectorXd eigvals;     ///< k, nonincreasing, positive

  /// directions * S^{-1/2}
  Eigen::MatrixXd whitening() const;
};

/// Top-k eigenpairs (by magnitude) of sum_i w_i (f1_i f2_i^T + f2_i f1_i^T) / 2.
CoordinateWhitening whiten_pair(const Eigen::MatrixXd& F1, const Eigen::MatrixXd& F2,
                                const Eigen::VectorXd& weights, int k);

/// Weighted three-term cyclic tensor: sum_i w_i [x1 x2 x3 + x3 x1 x2 + x2 x3 x1] / 3 (rows of X*).
WhitenedTensor cyclic_tensor(const Eigen::MatrixXd& X1, const Eigen::MatrixXd& X2,
                             const Eigen::MatrixXd& X3, const Eigen::VectorXd& weights);

/// Expresses coordinate whitening directions over the pivot points of a feature map.
WhiteningBasis to_basis(const kernel::FeatureMap& features, const CoordinateWhitening& whitening);

/// Reduction of an asymmetric three-view model to a symmetric one for the third view.
struct SymmetrizedCoordinates {
  CoordinateWhitening whitening;  ///< whitening of Pair_3 in view-3 coordinates
  WhitenedTensor tensor;
  double cross_condition = 0.0;   ///< sigma_min / sigma_max of the projected view-1/2 moment
};

/// How views 1 and 2 are reduced to k coordinates before the cross-view inverse.
enum class Projection {
  OwnMoment,    ///< each view's own k leading second-moment directions
  CrossMoment,  ///< top-k singular directions of the view-1/view-2 cross moment
};

/// Rows of F1, F2, F3 are the feature coordinates of views 1, 2, 3 for the same samples.
SymmetrizedCoordinates symmetrize_coordinates(const Eigen::MatrixXd& F1, const Eigen::MatrixXd& F2,
                                              const Eigen::MatrixXd& F3,
                                              const Eigen::VectorXd& weights, int k,
                                              Projection projection = Projection::CrossMoment);

struct SymmetrizedView {
  WhiteningBasis basis;  ///< whitening basis for view 3
  WhitenedTensor tensor;
};

/// Gram-form entry point: K, L, G are the m x m Grams of views 1, 2, 3. The view-3 sample and
/// kernel are needed to express the resulting basis. Empty weights means 1/m each.
SymmetrizedView symmetrize_views(const Eigen::MatrixXd& K, const Eigen::MatrixXd& L,
                                 const Eigen::MatrixXd& G, const kernel::KernelSpec& spec3,
                                 const Points& view3, int k,
                                 const Eigen::VectorXd& weights = Eigen::VectorXd());

}  // namespace kspec::spectral
