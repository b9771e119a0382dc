#include "kspec/cv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

#include "kspec/errors.hpp"
#include "kspec/recovery.hpp"

namespace kspec::cv {

std::vector<double> default_multipliers() {
  std::vector<double> g;
  for (int j = 0; j <= 6; ++j) g.push_back(std::pow(4.0, j));
  return g;
}

std::array<std::vector<double>, kNumViews> bandwidth_grid(const MultiViewDataset& data,
                                                          const std::vector<double>& multipliers) {
  std::array<std::vector<double>, kNumViews> grids;
  for (int v = 0; v < kNumViews; ++v) {
    const double s = kernel::median_heuristic(data.views[static_cast<size_t>(v)]);
    for (double mult : multipliers) grids[static_cast<size_t>(v)].push_back(mult * s);
  }
  return grids;
}

std::vector<int> fold_assignment(Eigen::Index n, int folds, std::uint64_t seed) {
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  // Fisher-Yates with explicit draws so the permutation does not depend on the library's shuffle.
  for (Eigen::Index i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<Eigen::Index> pick(0, i);
    std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(pick(rng))]);
  }
  std::vector<int> fold(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) fold[static_cast<size_t>(order[static_cast<size_t>(i)])] = static_cast<int>(i % folds);
  return fold;
}

namespace {

double mean_log_score(const recovery::MultiViewModel& model, int view, const Points& X) {
  const Eigen::VectorXd mix = model.view_density(view, X).cwiseMax(recovery::kDensityFloor) * model.weights();
  return mix.array().max(recovery::kDensityFloor).log().mean();
}

Points rows_of(const Points& X, const std::vector<Eigen::Index>& rows) {
  Points out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
  return out;
}

}  // namespace

CvResult cross_validate_bandwidth(const MultiViewDataset& data,
                                  const std::array<std::vector<double>, kNumViews>& grids,
                                  const CvOptions& opt) {
  data.validate();
  if (opt.folds < 2) throw InputError("cross_validate_bandwidth: need at least 2 folds");
  if (data.size() < opt.folds) throw InputError("cross_validate_bandwidth: fewer samples than folds");
  const size_t G = grids[0].size();
  if (G == 0) throw InputError("cross_validate_bandwidth: empty grid");
  for (const auto& g : grids) {
    if (g.size() != G) throw InputError("cross_validate_bandwidth: grids differ in length");
  }

  const std::vector<int> fold = fold_assignment(data.size(), opt.folds, opt.fold_seed);
  std::vector<std::vector<Eigen::Index>> train(static_cast<size_t>(opt.folds)), held(static_cast<size_t>(opt.folds));
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (int f = 0; f < opt.folds; ++f) {
      (fold[static_cast<size_t>(i)] == f ? held : train)[static_cast<size_t>(f)].push_back(i);
    }
  }

  CvResult result;
  const double ninf = -std::numeric_limits<double>::infinity();
  result.scores = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(G), kNumViews, ninf);

  for (size_t g = 0; g < G; ++g) {
    std::array<kernel::KernelSpec, kNumViews> specs;
    for (int v = 0; v < kNumViews; ++v) specs[static_cast<size_t>(v)] = kernel::KernelSpec::rbf(grids[static_cast<size_t>(opt.symmetric ? 0 : v)][g]);

    // Factorizations cover the full sample once per grid point and are shared by all folds.
    std::vector<kernel::FeatureMap> maps;
    if (!opt.symmetric) {
      for (int v = 0; v < kNumViews; ++v) {
        maps.push_back(kernel::FeatureMap::build(specs[static_cast<size_t>(v)], data.views[static_cast<size_t>(v)],
                                                 opt.low_rank.rel_tol, opt.low_rank.max_rank));
      }
    }

    Eigen::Array<double, 1, kNumViews> total = Eigen::Array<double, 1, kNumViews>::Zero();
    int ok = 0;
    for (int f = 0; f < opt.folds; ++f) {
      const auto uf = static_cast<size_t>(f);
      std::optional<pipeline::KernelFit> fit;
      try {
        if (opt.symmetric) {
          fit = pipeline::fit_symmetric(data.subset(train[uf]), specs[0], opt.k, opt.power, opt.low_rank);
        } else {
          fit = pipeline::fit_multiview(data, {&maps[0], &maps[1], &maps[2]}, train[uf], opt.k, opt.power);
        }
      } catch (const NumericalError&) {
        continue;
      }
      Eigen::Array<double, 1, kNumViews> s;
      for (int v = 0; v < kNumViews; ++v) {
        s(v) = mean_log_score(fit->model, v, rows_of(data.views[static_cast<size_t>(v)], held[uf]));
      }
      total += s;
      ++ok;
    }
    if (ok > 0) result.scores.row(static_cast<Eigen::Index>(g)) = (total / ok).matrix();
  }

  for (int v = 0; v < kNumViews; ++v) {
    const int col = opt.symmetric ? -1 : v;
    int best = -1;
    for (int g = 0; g < static_cast<int>(G); ++g) {
      const double s = col < 0 ? result.scores.row(g).sum() : result.scores(g, v);
      const double b = best < 0 ? ninf : (col < 0 ? result.scores.row(best).sum() : result.scores(best, v));
      if (std::isfinite(s) && (best < 0 || s > b)) best = g;
    }
    if (best < 0) throw NumericalError("cross_validate_bandwidth: every grid point was degenerate");
    result.selected[static_cast<size_t>(v)] = best;
    result.bandwidths[static_cast<size_t>(v)] = grids[static_cast<size_t>(opt.symmetric ? 0 : v)][static_cast<size_t>(best)];
  }
  return result;
}

}  // namespace kspec::cv
