#pragma once

#include <Eigen/Dense>

#include <vector>

namespace kspec::matching {

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian algorithm, O(n^3)).
/// Returns col[r], the column assigned to row r.
std::vector<int> hungarian(const Eigen::MatrixXd& cost);

/// Same, maximizing total weight.
std::vector<int> hungarian_max(const Eigen::MatrixXd& weight);

}  // namespace kspec::matching
