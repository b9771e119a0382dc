#include "kspec/dataset.hpp"

#include <cstring>
#include <string>

#include "kspec/errors.hpp"

namespace kspec {

void MultiViewDataset::validate() const {
  const Eigen::Index m = size();
  for (int v = 1; v < kNumViews; ++v) {
    if (views[static_cast<size_t>(v)].rows() != m) {
      throw InputError("dataset views have different row counts");
    }
  }
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != m) {
    throw InputError("dataset label count " + std::to_string(labels.size()) +
                     " does not match row count " + std::to_string(m));
  }
}

MultiViewDataset MultiViewDataset::subset(const std::vector<Eigen::Index>& rows) const {
  MultiViewDataset out;
  for (int v = 0; v < kNumViews; ++v) {
    const Points& src = views[static_cast<size_t>(v)];
    Points& dst = out.views[static_cast<size_t>(v)];
    dst.resize(static_cast<Eigen::Index>(rows.size()), src.cols());
    for (size_t i = 0; i < rows.size(); ++i) dst.row(static_cast<Eigen::Index>(i)) = src.row(rows[i]);
  }
  if (has_labels()) {
    out.labels.reserve(rows.size());
    for (Eigen::Index r : rows) out.labels.push_back(labels[static_cast<size_t>(r)]);
  }
  return out;
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t fnv_update(std::uint64_t h, const Points& points) {
  auto mix = [&h](const void* data, size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= kFnvPrime;
    }
  };
  const std::int64_t dims[2] = {points.rows(), points.cols()};
  mix(dims, sizeof(dims));
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      const double v = points(i, j);
      mix(&v, sizeof(v));
    }
  return h;
}

}  // namespace

std::uint64_t checksum(const Points& points) { return fnv_update(kFnvOffset, points); }

std::uint64_t checksum(const MultiViewDataset& data) {
  std::uint64_t h = kFnvOffset;
  for (const auto& view : data.views) h = fnv_update(h, view);
  return h;
}

}  // namespace kspec
