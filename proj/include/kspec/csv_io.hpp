#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "kspec/dataset.hpp"

namespace kspec::io {

/// Header `view1_0, ..., view2_0, ..., view3_0, ..., label`; values at full round-trip precision.
/// The label column is written 1-based when the dataset has labels.
void write_dataset(std::ostream& out, const MultiViewDataset& data);
void write_dataset(const std::string& path, const MultiViewDataset& data);

/// Column groups (0-based, over the non-label columns) forming views 1..3.
using ViewSplit = std::array<std::vector<int>, kNumViews>;

/// Reads a headered numeric CSV. A column named `label` (1-based values) becomes the labels.
/// An empty split means: the file's own view<v>_* headers decide the grouping.
MultiViewDataset ingest_csv(std::istream& in, const ViewSplit& split = {});
MultiViewDataset ingest_csv(const std::string& path, const ViewSplit& split = {});

}  // namespace kspec::io
