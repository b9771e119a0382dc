#include "kspec/serialize.hpp"

#include <fstream>

#include "kspec/errors.hpp"

namespace kspec::io {

using nlohmann::json;

namespace {

json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index cols_if_empty = 0) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : cols_if_empty;
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j.at(static_cast<size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw InputError("model JSON: ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) M(i, c) = row.at(static_cast<size_t>(c)).get<double>();
  }
  return M;
}

json vector_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

json to_json(const kernel::KernelSpec& spec) {
  return {{"family", kernel::to_string(spec.family)}, {"bandwidth", spec.bandwidth}};
}

kernel::KernelSpec kernel_from_json(const json& j) {
  kernel::KernelSpec spec;
  spec.family = kernel::family_from_string(j.at("family").get<std::string>());
  spec.bandwidth = j.value("bandwidth", 1.0);
  spec.validate();
  return spec;
}

json to_json(const recovery::MixtureEstimate& est) {
  return {{"kernel", to_json(est.spec)},
          {"weights", vector_to_json(est.weights)},
          {"coeffs", matrix_to_json(est.coeffs)},
          {"basisPoints", matrix_to_json(est.basis_points)},
          {"trainChecksum", est.train_checksum}};
}

recovery::MixtureEstimate estimate_from_json(const json& j) {
  try {
    recovery::MixtureEstimate est;
    est.spec = kernel_from_json(j.at("kernel"));
    est.weights = vector_from_json(j.at("weights"));
    est.coeffs = matrix_from_json(j.at("coeffs"), est.weights.size());
    est.basis_points = matrix_from_json(j.at("basisPoints"));
    est.train_checksum = j.at("trainChecksum").get<std::uint64_t>();
    est.validate();
    return est;
  } catch (const json::exception& e) {
    throw InputError(std::string("model JSON: ") + e.what());
  }
}

json to_json(const recovery::KernelMixtureModel& model) {
  json views = json::array();
  for (int v = 0; v < kNumViews; ++v) views.push_back(to_json(model.view(v)));
  return {{"estimator", "kernelSpectral"}, {"weights", vector_to_json(model.weights())}, {"views", views}};
}

json to_json(const em::GaussianMixture& model) {
  json means = json::array(), vars = json::array();
  for (int v = 0; v < kNumViews; ++v) {
    means.push_back(matrix_to_json(model.means[static_cast<size_t>(v)]));
    vars.push_back(matrix_to_json(model.variances[static_cast<size_t>(v)]));
  }
  return {{"estimator", "emGMM"}, {"weights", vector_to_json(model.pi)}, {"means", means}, {"variances", vars}};
}

std::unique_ptr<recovery::MultiViewModel> model_from_json(const json& j) {
  try {
    const std::string kind = j.at("estimator").get<std::string>();
    if (kind == "kernelSpectral") {
      std::array<recovery::MixtureEstimate, kNumViews> views;
      for (int v = 0; v < kNumViews; ++v) views[static_cast<size_t>(v)] = estimate_from_json(j.at("views").at(static_cast<size_t>(v)));
      return std::make_unique<recovery::KernelMixtureModel>(std::move(views), vector_from_json(j.at("weights")));
    }
    if (kind == "emGMM") {
      auto g = std::make_unique<em::GaussianMixture>();
      g->pi = vector_from_json(j.at("weights"));
      for (int v = 0; v < kNumViews; ++v) {
        g->means[static_cast<size_t>(v)] = matrix_from_json(j.at("means").at(static_cast<size_t>(v)));
        g->variances[static_cast<size_t>(v)] = matrix_from_json(j.at("variances").at(static_cast<size_t>(v)));
        if (g->means[static_cast<size_t>(v)].rows() != g->k() ||
            g->variances[static_cast<size_t>(v)].rows() != g->k()) {
          throw InputError("model JSON: component counts disagree");
        }
      }
      return g;
    }
    throw InputError("model JSON: unknown estimator '" + kind + "'");
  } catch (const json::exception& e) {
    throw InputError(std::string("model JSON: ") + e.what());
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

}  // namespace kspec::io
