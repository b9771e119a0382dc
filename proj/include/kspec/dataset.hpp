#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "kspec/kernel.hpp"

namespace kspec {

inline constexpr int kNumViews = 3;

/// m i.i.d. triples (x1, x2, x3); view v holds one row per triple.
struct MultiViewDataset {
  std::array<Points, kNumViews> views;
  /// Hidden component per row (0-based); empty when unknown.
  std::vector<int> labels;

  Eigen::Index size() const { return views[0].rows(); }
  bool has_labels() const { return !labels.empty(); }

  /// Throws InputError when view row counts or the label count disagree.
  void validate() const;

  MultiViewDataset subset(const std::vector<Eigen::Index>& rows) const;
};

/// FNV-1a over the raw bytes of the values; identifies a training sample in serialized models.
std::uint64_t checksum(const Points& points);
std::uint64_t checksum(const MultiViewDataset& data);

}  // namespace kspec
