#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "kspec/em_gmm.hpp"
#include "kspec/recovery.hpp"

namespace kspec::io {

nlohmann::json to_json(const kernel::KernelSpec& spec);
kernel::KernelSpec kernel_from_json(const nlohmann::json& j);

/// Kernel spec, weights, coefficients, basis points and training checksum; doubles round-trip.
nlohmann::json to_json(const recovery::MixtureEstimate& est);
recovery::MixtureEstimate estimate_from_json(const nlohmann::json& j);

/// {"estimator": "kernelSpectral", "weights": [...], "views": [estimate x3]}
nlohmann::json to_json(const recovery::KernelMixtureModel& model);
/// {"estimator": "emGMM", "weights": [...], "means": [...], "variances": [...]}
nlohmann::json to_json(const em::GaussianMixture& model);

/// Reads either model document.
std::unique_ptr<recovery::MultiViewModel> model_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace kspec::io
