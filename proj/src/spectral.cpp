#include "kspec/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "kspec/errors.hpp"

namespace kspec::spectral {

namespace {

struct SortedEigen {
  Eigen::VectorXd values;   // by decreasing magnitude
  Eigen::MatrixXd vectors;
};

SortedEigen eigen_by_magnitude(const Eigen::MatrixXd& M) {
  const Eigen::MatrixXd sym = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigendecomposition failed");
  const Eigen::Index n = sym.rows();
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const Eigen::VectorXd& ev = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(ev(a)) > std::abs(ev(b));
  });
  SortedEigen out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = ev(order[static_cast<size_t>(i)]);
    out.vectors.col(i) = es.eigenvectors().col(order[static_cast<size_t>(i)]);
  }
  return out;
}

// Throws unless the k leading magnitudes clear the relative rank tolerance.
void require_rank(const Eigen::VectorXd& magnitudes, int k, const char* what) {
  if (k < 1) throw InputError(std::string(what) + ": k must be at least 1");
  int achievable = 0;
  const double top = magnitudes.size() ? magnitudes(0) : 0.0;
  for (Eigen::Index i = 0; i < magnitudes.size(); ++i) {
    if (magnitudes(i) > 0.0 && magnitudes(i) > kRankTolerance * top) ++achievable;
  }
  if (achievable < k) {
    throw RankDeficiencyError(std::string(what) + ": requested k=" + std::to_string(k) +
                                  " but the numerical rank is " + std::to_string(achievable),
                              achievable);
  }
}

Eigen::VectorXd resolve_weights(const Eigen::VectorXd& weights, Eigen::Index m) {
  if (weights.size() == 0) return uniform_weights(m);
  if (weights.size() != m) throw InputError("sample weight count does not match sample count");
  return weights;
}

Eigen::MatrixXd invert_cross_moment(const Eigen::MatrixXd& C, double& condition) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  const double smin = s.size() ? s(s.size() - 1) : 0.0;
  condition = smax > 0.0 ? smin / smax : 0.0;
  if (!(smax > 0.0) || smin <= kPinvCutoff * smax) {
    throw ConditioningError("projected cross-view moment is singular (relative sigma_min " +
                            std::to_string(condition) + "); views are insufficiently correlated");
  }
  Eigen::VectorXd inv = s.cwiseInverse();
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

// Top-k eigenvectors of sum_i w_i f_i f_i^T (the view's own second moment).
Eigen::MatrixXd leading_directions(const Eigen::MatrixXd& F, const Eigen::VectorXd& w, int k) {
  if (F.cols() < k) {
    throw RankDeficiencyError("view feature rank " + std::to_string(F.cols()) +
                                  " is below k=" + std::to_string(k),
                              static_cast<int>(F.cols()));
  }
  const Eigen::MatrixXd moment = F.transpose() * w.asDiagonal() * F;
  SortedEigen se = eigen_by_magnitude(moment);
  require_rank(se.values.cwiseAbs(), k, "symmetrize_views");
  return se.vectors.leftCols(k);
}

// Top-k left/right singular vectors of sum_i w_i f1_i f2_i^T.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> cross_directions(const Eigen::MatrixXd& F1,
                                                             const Eigen::MatrixXd& F2,
                                                             const Eigen::VectorXd& w, int k) {
  if (F1.cols() < k || F2.cols() < k) {
    const auto r = std::min(F1.cols(), F2.cols());
    throw RankDeficiencyError("view feature rank " + std::to_string(r) + " is below k=" + std::to_string(k),
                              static_cast<int>(r));
  }
  const Eigen::MatrixXd cross = F1.transpose() * w.asDiagonal() * F2;
  // A weak cross moment surfaces as a singular projected moment in invert_cross_moment.
  Eigen::BDCSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU().leftCols(k), svd.matrixV().leftCols(k)};
}

}  // namespace

Eigen::VectorXd uniform_weights(Eigen::Index m) {
  if (m <= 0) throw InputError("uniform_weights: empty sample");
  return Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
}

Eigen::MatrixXd CoordinateWhitening::whitening() const {
  return directions * eigvals.cwiseSqrt().cwiseInverse().asDiagonal();
}

StackedPairGrams stack_pair_grams(const kernel::KernelSpec& spec, const MultiViewDataset& data,
                                  std::pair<int, int> views) {
  const auto [a, b] = views;
  if (a < 0 || a >= kNumViews || b < 0 || b >= kNumViews || a == b) {
    throw InputError("stack_pair_grams: view indices out of range");
  }
  data.validate();
  const Eigen::Index m = data.size();
  if (m < 1) throw InputError("stack_pair_grams: empty dataset");
  const Points& xa = data.views[static_cast<size_t>(a)];
  const Points& xb = data.views[static_cast<size_t>(b)];
  if (xa.cols() != xb.cols()) throw InputError("stack_pair_grams: views differ in dimension");

  StackedPairGrams g;
  g.spec = spec;
  g.m = m;
  g.stacked.resize(2 * m, xa.cols());
  g.stacked.topRows(m) = xa;
  g.stacked.bottomRows(m) = xb;
  g.K = kernel::gram_matrix(spec, g.stacked);
  g.L.resize(2 * m, 2 * m);
  g.L.topLeftCorner(m, m) = g.K.bottomRightCorner(m, m);
  g.L.bottomRightCorner(m, m) = g.K.topLeftCorner(m, m);
  g.L.topRightCorner(m, m) = g.K.bottomLeftCorner(m, m);
  g.L.bottomLeftCorner(m, m) = g.K.topRightCorner(m, m);
  return g;
}

WhiteningBasis kernel_svd(const StackedPairGrams& grams, int k) {
  if (k < 1) throw InputError("kernel_svd: k must be at least 1");
  const Eigen::Index n = grams.K.rows();
  const double m = static_cast<double>(grams.m);

  // K = R^T R with R = F^T; pivoted so that a semidefinite K terminates at its numerical rank.
  const kernel::LowRankFactor chol =
      kernel::pivoted_cholesky(grams.K, kCompleteCholeskyTolerance * grams.K.trace());
  const Eigen::MatrixXd& F = chol.factor;
  if (F.cols() < k) {
    throw RankDeficiencyError("kernel_svd: Gram rank " + std::to_string(F.cols()) +
                                  " is below k=" + std::to_string(k),
                              static_cast<int>(F.cols()));
  }
  const Eigen::MatrixXd RLRt = F.transpose() * grams.L * F / (4.0 * m * m);
  SortedEigen se = eigen_by_magnitude(RLRt);
  // RLR^T is PSD; its eigenvalues are sigma^2.
  Eigen::VectorXd sigma = se.values.cwiseMax(0.0).cwiseSqrt();
  require_rank(sigma, k, "kernel_svd");

  // beta = R^+ beta~ : triangular solve on the pivot block, zero elsewhere.
  kernel::FeatureMap fm(grams.spec, grams.stacked, chol);
  const Eigen::MatrixXd on_pivots = fm.expansion_coefficients(se.vectors.leftCols(k));
  WhiteningBasis basis;
  basis.eigvals = sigma.head(k);
  basis.coeffs = Eigen::MatrixXd::Zero(n, k);
  for (Eigen::Index j = 0; j < F.cols(); ++j) {
    basis.coeffs.row(chol.pivot_order[static_cast<size_t>(j)]) = on_pivots.row(j);
  }
  basis.spec = grams.spec;
  basis.basis_points = grams.stacked;
  return basis;
}

Eigen::VectorXd WhiteningBasis::project(const PointRef& x) const {
  Points one(1, x.size());
  one.row(0) = x;
  return project(one).row(0).transpose();
}

Eigen::MatrixXd WhiteningBasis::project(const Points& X) const {
  if (X.cols() != basis_points.cols()) throw InputError("project_features: dimension mismatch");
  // Only rows with nonzero coefficients contribute.
  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < coeffs.rows(); ++j) {
    if (coeffs.row(j).squaredNorm() > 0.0) active.push_back(j);
  }
  const auto na = static_cast<Eigen::Index>(active.size());
  Points pts(na, basis_points.cols());
  Eigen::MatrixXd B(na, coeffs.cols());
  for (Eigen::Index i = 0; i < na; ++i) {
    pts.row(i) = basis_points.row(active[static_cast<size_t>(i)]);
    B.row(i) = coeffs.row(active[static_cast<size_t>(i)]);
  }
  if (na == 0) return Eigen::MatrixXd::Zero(X.rows(), k());
  const Eigen::MatrixXd G = kernel::gram_matrix(spec, X, pts);  // n x na
  return G * B * eigvals.cwiseSqrt().cwiseInverse().asDiagonal();
}

Eigen::VectorXd project_features(const WhiteningBasis& basis, const kernel::KernelSpec& spec,
                                 const PointRef& x) {
  if (!(spec == basis.spec)) throw InputError("project_features: kernel differs from the basis");
  return basis.project(x);
}

WhitenedTensor cyclic_tensor(const Eigen::MatrixXd& X1, const Eigen::MatrixXd& X2,
                             const Eigen::MatrixXd& X3, const Eigen::VectorXd& weights) {
  const Eigen::Index m = X1.rows();
  if (X2.rows() != m || X3.rows() != m || weights.size() != m) {
    throw InputError("cyclic_tensor: sample counts disagree");
  }
  const int k = static_cast<int>(X1.cols());
  WhitenedTensor T(k);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::VectorXd a = X1.row(i).transpose();
    const Eigen::VectorXd b = X2.row(i).transpose();
    const Eigen::VectorXd c = X3.row(i).transpose();
    const double w = weights(i) / 3.0;
    T.add_outer(w, a, b, c);
    T.add_outer(w, c, a, b);
    T.add_outer(w, b, c, a);
  }
  return T;
}

WhitenedTensor whitened_tensor(const WhiteningBasis& basis, const kernel::KernelSpec& spec,
                               const MultiViewDataset& data) {
  if (!(spec == basis.spec)) throw InputError("whitened_tensor: kernel differs from the basis");
  data.validate();
  const Eigen::MatrixXd X1 = basis.project(data.views[0]);
  const Eigen::MatrixXd X2 = basis.project(data.views[1]);
  const Eigen::MatrixXd X3 = basis.project(data.views[2]);
  return cyclic_tensor(X1, X2, X3, uniform_weights(data.size()));
}

PopulationWhitening whiten_population(const Eigen::MatrixXd& C2, const WhitenedTensor& C3, int k) {
  if (C2.rows() != C2.cols() || C3.dim() != C2.rows()) {
    throw InputError("whiten_population: moment dimensions disagree");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (C2 + C2.transpose()));
  if (es.info() != Eigen::Success) throw NumericalError("whiten_population: eigensolver failed");
  const Eigen::Index n = C2.rows();
  const Eigen::VectorXd desc = es.eigenvalues().reverse();
  require_rank(desc.cwiseMax(0.0), k, "whiten_population");

  PopulationWhitening out;
  out.basis.eigvals = desc.head(k);
  out.basis.coeffs = es.eigenvectors().rowwise().reverse().leftCols(k);
  out.basis.spec = kernel::KernelSpec::delta();
  out.basis.basis_points = Eigen::VectorXd::LinSpaced(n, 0.0, static_cast<double>(n - 1));
  const Eigen::MatrixXd W = out.basis.coeffs * out.basis.eigvals.cwiseSqrt().cwiseInverse().asDiagonal();
  out.tensor = C3.multilinear(W.transpose());
  return out;
}

CoordinateWhitening whiten_pair(const Eigen::MatrixXd& F1, const Eigen::MatrixXd& F2,
                                const Eigen::VectorXd& weights, int k) {
  if (F1.rows() != F2.rows() || F1.cols() != F2.cols() || weights.size() != F1.rows()) {
    throw InputError("whiten_pair: feature blocks disagree");
  }
  if (F1.cols() < k) {
    throw RankDeficiencyError("whiten_pair: feature rank " + std::to_string(F1.cols()) +
                                  " is below k=" + std::to_string(k),
                              static_cast<int>(F1.cols()));
  }
  const Eigen::MatrixXd cross = F1.transpose() * weights.asDiagonal() * F2;
  SortedEigen se = eigen_by_magnitude(0.5 * (cross + cross.transpose()));
  const Eigen::VectorXd sigma = se.values.cwiseAbs();
  require_rank(sigma, k, "kernel_svd");
  return {se.vectors.leftCols(k), sigma.head(k)};
}

WhiteningBasis to_basis(const kernel::FeatureMap& features, const CoordinateWhitening& whitening) {
  WhiteningBasis basis;
  basis.eigvals = whitening.eigvals;
  basis.coeffs = features.expansion_coefficients(whitening.directions);
  basis.spec = features.spec();
  basis.basis_points = features.pivot_points();
  return basis;
}

SymmetrizedCoordinates symmetrize_coordinates(const Eigen::MatrixXd& F1, const Eigen::MatrixXd& F2,
                                              const Eigen::MatrixXd& F3,
                                              const Eigen::VectorXd& weights, int k,
                                              Projection projection) {
  const Eigen::Index m = F1.rows();
  if (F2.rows() != m || F3.rows() != m || weights.size() != m) {
    throw InputError("symmetrize_views: sample counts disagree");
  }
  if (k < 1) throw InputError("symmetrize_views: k must be at least 1");
  const Eigen::VectorXd& w = weights;

  Eigen::MatrixXd a, b;
  if (projection == Projection::OwnMoment) {
    // Projections of views 1 and 2 onto their own k leading directions (K_nk, L_nk).
    a = F1 * leading_directions(F1, w, k);
    b = F2 * leading_directions(F2, w, k);
  } else {
    const auto [U, V] = cross_directions(F1, F2, w, k);
    a = F1 * U;
    b = F2 * V;
  }

  SymmetrizedCoordinates out;
  const Eigen::MatrixXd C12 = a.transpose() * w.asDiagonal() * b;  // k x k
  const Eigen::MatrixXd inv12 = invert_cross_moment(C12, out.cross_condition);
  const Eigen::MatrixXd C31 = F3.transpose() * w.asDiagonal() * a;  // r3 x k
  const Eigen::MatrixXd C32 = F3.transpose() * w.asDiagonal() * b;

  // Pair_3 = C31 (C12^T)^{-1} C32^T; top-k right singular pairs via Pair_3^T Pair_3.
  const Eigen::MatrixXd pair3 = C31 * inv12.transpose() * C32.transpose();
  if (F3.cols() < k) {
    throw RankDeficiencyError("symmetrize_views: view-3 feature rank " +
                                  std::to_string(F3.cols()) + " is below k=" + std::to_string(k),
                              static_cast<int>(F3.cols()));
  }
  SortedEigen se = eigen_by_magnitude(pair3.transpose() * pair3);
  for (int i = 0; i < k; ++i) {
    if (se.values(i) < 0.0) throw NumericalError("symmetrize_views: negative squared singular value");
  }
  const Eigen::VectorXd lambda = se.values.cwiseMax(0.0).cwiseSqrt();
  require_rank(lambda, k, "symmetrize_views");
  out.whitening = {se.vectors.leftCols(k), lambda.head(k)};

  const Eigen::MatrixXd W3 = out.whitening.whitening();  // r3 x k
  const Eigen::MatrixXd xi3 = F3 * W3;
  // View-1 and view-2 features carried into whitened view-3 coordinates.
  const Eigen::MatrixXd z1 = a * (W3.transpose() * C32 * inv12).transpose();
  const Eigen::MatrixXd z2 = b * (W3.transpose() * C31 * inv12.transpose()).transpose();
  out.tensor = cyclic_tensor(z1, z2, xi3, w);
  return out;
}

SymmetrizedView symmetrize_views(const Eigen::MatrixXd& K, const Eigen::MatrixXd& L,
                                 const Eigen::MatrixXd& G, const kernel::KernelSpec& spec3,
                                 const Points& view3, int k, const Eigen::VectorXd& weights) {
  const Eigen::Index m = K.rows();
  if (L.rows() != m || G.rows() != m || view3.rows() != m) {
    throw InputError("symmetrize_views: Gram sizes disagree");
  }
  const Eigen::VectorXd w = resolve_weights(weights, m);
  auto factor = [](const Eigen::MatrixXd& gram) {
    return kernel::pivoted_cholesky(gram, kCompleteCholeskyTolerance * gram.trace());
  };
  const kernel::LowRankFactor f1 = factor(K);
  const kernel::LowRankFactor f2 = factor(L);
  kernel::FeatureMap fm3(spec3, view3, factor(G));

  SymmetrizedCoordinates sc = symmetrize_coordinates(f1.factor, f2.factor, fm3.sample_features(), w, k);
  return {to_basis(fm3, sc.whitening), std::move(sc.tensor)};
}

}  // namespace kspec::spectral
