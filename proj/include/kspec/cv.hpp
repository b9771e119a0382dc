#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

#include "kspec/dataset.hpp"
#include "kspec/pipeline.hpp"
#include "kspec/tensor_power.hpp"

namespace kspec::cv {

/// Multipliers applied to the median-heuristic scale when no explicit grid is given.
std::vector<double> default_multipliers();

/// Per-view grids: multiplier * median_heuristic(view).
std::array<std::vector<double>, kNumViews> bandwidth_grid(const MultiViewDataset& data,
                                                          const std::vector<double>& multipliers);

struct CvOptions {
  int folds = 5;
  int k = 1;
  tensor::PowerConfig power;
  pipeline::LowRankOptions low_rank;
  std::uint64_t fold_seed = 0;
  bool symmetric = false;  ///< fit one shared estimate (grids of view 1 are used for every view)
};

struct CvResult {
  std::array<double, kNumViews> bandwidths{};
  std::array<int, kNumViews> selected{};
  Eigen::MatrixXd scores;  ///< grid point x view, mean held-out log density; -inf when degenerate
};

/// Fold index per row: a seeded shuffle dealt round-robin into `folds` parts.
std::vector<int> fold_assignment(Eigen::Index n, int folds, std::uint64_t seed);

/// Grid point g sets every view to grids[v][g]. Each view keeps the grid point with the best
/// held-out mean of log sum_h pi_h max(p(x|h), floor); ties go to the smaller index.
CvResult cross_validate_bandwidth(const MultiViewDataset& data,
                                  const std::array<std::vector<double>, kNumViews>& grids,
                                  const CvOptions& opt);

}  // namespace kspec::cv
