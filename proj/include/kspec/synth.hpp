#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "kspec/dataset.hpp"

namespace kspec::synth {

enum class LawKind { Gaussian, ShiftedGamma };

/// Univariate conditional law of one view.
struct Law {
  LawKind kind = LawKind::Gaussian;
  double mean = 0.0;      ///< Gaussian mean
  double variance = 1.0;  ///< Gaussian variance
  double shape = 1.0;     ///< Gamma shape d, in (0, 1]
  double scale = 1.0;     ///< Gamma scale theta
  double shift = 0.0;     ///< Gamma location mu

  static Law gaussian(double mean, double variance);
  static Law shifted_gamma(double shape, double scale, double shift);

  void validate() const;
  double pdf(double x) const;
  double expectation() const;
  double var() const;

  bool operator==(const Law&) const = default;
};

struct ComponentSpec {
  std::array<Law, kNumViews> views;
  bool operator==(const ComponentSpec&) const = default;
};

struct SyntheticSpec {
  int k = 0;
  std::vector<ComponentSpec> components;
  Eigen::VectorXd mixing;
  Eigen::Index m = 0;
  std::uint64_t seed = 0;
  bool symmetric_views = false;

  void validate() const;
};

/// pi_h = 2h / (k(k+1)), h = 1..k.
Eigen::VectorXd default_mixing(int k);

/// (mu1 - mu2)^2 / (var1 + var2).
double fisher_ratio(double mu1, double mu2, double var1, double var2);

/// m draws: h ~ mixing, then each view independently from its law. Labels are 0-based.
MultiViewDataset sample_dataset(const SyntheticSpec& spec);

/// pdf of view v of component h at x.
double true_density(const SyntheticSpec& spec, int h, int view, double x);

/// Named preset from the bundled preset file with default mixing; m and seed are left for the
/// caller.
SyntheticSpec preset(const std::string& name);
std::vector<std::string> preset_names();
/// Version field of the bundled preset file.
int preset_version();

nlohmann::json to_json(const SyntheticSpec& spec);
/// Accepts either a full spec or {"preset": name, "m": ..., "seed": ...}; "mixing" is optional
/// and defaults to default_mixing(k).
SyntheticSpec spec_from_json(const nlohmann::json& j);

}  // namespace kspec::synth
