#include "kspec/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "kspec/errors.hpp"

namespace kspec::io {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& cell, long line) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last) {
    throw ParseError("non-numeric cell '" + cell + "'", line);
  }
  return value;
}

}  // namespace

void write_dataset(std::ostream& out, const MultiViewDataset& data) {
  data.validate();
  bool first = true;
  for (int v = 0; v < kNumViews; ++v) {
    for (Eigen::Index c = 0; c < data.views[static_cast<size_t>(v)].cols(); ++c) {
      out << (first ? "" : ",") << "view" << v + 1 << '_' << c;
      first = false;
    }
  }
  if (data.has_labels()) out << ",label";
  out << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    first = true;
    for (const auto& view : data.views) {
      for (Eigen::Index c = 0; c < view.cols(); ++c) {
        out << (first ? "" : ",") << view(i, c);
        first = false;
      }
    }
    if (data.has_labels()) out << ',' << data.labels[static_cast<size_t>(i)] + 1;
    out << '\n';
  }
}

void write_dataset(const std::string& path, const MultiViewDataset& data) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  write_dataset(out, data);
}

MultiViewDataset ingest_csv(std::istream& in, const ViewSplit& split) {
  std::string line;
  long lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    header = split_line(line);
    break;
  }
  if (header.empty()) throw InputError("ingest_csv: empty file");

  int label_col = -1;
  std::vector<int> value_cols;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    if (header[static_cast<size_t>(c)] == "label") {
      label_col = c;
    } else {
      value_cols.push_back(c);
    }
  }

  ViewSplit groups = split;
  const bool implicit = groups[0].empty() && groups[1].empty() && groups[2].empty();
  if (implicit) {
    for (int j = 0; j < static_cast<int>(value_cols.size()); ++j) {
      const std::string& name = header[static_cast<size_t>(value_cols[static_cast<size_t>(j)])];
      int v = -1;
      for (int cand = 0; cand < kNumViews; ++cand) {
        if (name.rfind("view" + std::to_string(cand + 1) + "_", 0) == 0) v = cand;
      }
      if (v < 0) throw ParseError("column '" + name + "' has no view prefix; pass a view split", lineno);
      groups[static_cast<size_t>(v)].push_back(j);
    }
  }
  std::set<int> seen;
  for (const auto& g : groups) {
    if (g.empty()) throw InputError("ingest_csv: every view needs at least one column");
    for (int c : g) {
      if (c < 0 || c >= static_cast<int>(value_cols.size())) throw InputError("ingest_csv: view column out of range");
      if (!seen.insert(c).second) throw InputError("ingest_csv: view column groups overlap");
    }
  }

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " cells, found " + std::to_string(cells.size()), lineno);
    }
    std::vector<double> values;
    for (int c : value_cols) values.push_back(parse_number(cells[static_cast<size_t>(c)], lineno));
    if (label_col >= 0) {
      const double l = parse_number(cells[static_cast<size_t>(label_col)], lineno);
      if (l != std::floor(l) || l < 1) throw ParseError("label must be a positive integer", lineno);
      labels.push_back(static_cast<int>(l) - 1);
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw InputError("ingest_csv: no data rows");

  MultiViewDataset data;
  const auto n = static_cast<Eigen::Index>(rows.size());
  for (int v = 0; v < kNumViews; ++v) {
    const auto& g = groups[static_cast<size_t>(v)];
    Points& X = data.views[static_cast<size_t>(v)];
    X.resize(n, static_cast<Eigen::Index>(g.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
      for (size_t c = 0; c < g.size(); ++c) X(i, static_cast<Eigen::Index>(c)) = rows[static_cast<size_t>(i)][static_cast<size_t>(g[c])];
    }
  }
  data.labels = std::move(labels);
  return data;
}

MultiViewDataset ingest_csv(const std::string& path, const ViewSplit& split) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return ingest_csv(in, split);
}

}  // namespace kspec::io
