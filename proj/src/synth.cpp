#include "kspec/synth.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "kspec/errors.hpp"
#include "kspec/presets_data.hpp"

namespace kspec::synth {

using nlohmann::json;

Law Law::gaussian(double mean, double variance) {
  Law l;
  l.kind = LawKind::Gaussian;
  l.mean = mean;
  l.variance = variance;
  return l;
}

Law Law::shifted_gamma(double shape, double scale, double shift) {
  Law l;
  l.kind = LawKind::ShiftedGamma;
  l.shape = shape;
  l.scale = scale;
  l.shift = shift;
  return l;
}

void Law::validate() const {
  if (kind == LawKind::Gaussian) {
    if (!(variance > 0.0) || !std::isfinite(mean) || !std::isfinite(variance)) {
      throw InputError("Gaussian law needs finite mean and positive variance");
    }
  } else {
    if (!(shape > 0.0 && shape <= 1.0)) throw InputError("shifted Gamma shape must lie in (0, 1]");
    if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(shift)) {
      throw InputError("shifted Gamma needs positive scale and finite shift");
    }
  }
}

double Law::pdf(double x) const {
  if (kind == LawKind::Gaussian) {
    const double z = x - mean;
    return std::exp(-0.5 * z * z / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
  }
  const double z = x - shift;
  if (z < 0.0) return 0.0;
  if (z == 0.0) return shape == 1.0 ? 1.0 / scale : std::numeric_limits<double>::infinity();
  return std::exp((shape - 1.0) * std::log(z) - z / scale - shape * std::log(scale) - std::lgamma(shape));
}

double Law::expectation() const { return kind == LawKind::Gaussian ? mean : shift + shape * scale; }

double Law::var() const { return kind == LawKind::Gaussian ? variance : shape * scale * scale; }

void SyntheticSpec::validate() const {
  if (k < 1) throw InputError("SyntheticSpec: k must be >= 1");
  if (static_cast<int>(components.size()) != k) throw InputError("SyntheticSpec: need k components");
  if (mixing.size() != k) throw InputError("SyntheticSpec: mixing must have k entries");
  if ((mixing.array() < 0.0).any() || !mixing.allFinite() || std::abs(mixing.sum() - 1.0) > 1e-9) {
    throw InputError("SyntheticSpec: mixing must be nonnegative and sum to 1");
  }
  if (m < 1) throw InputError("SyntheticSpec: m must be >= 1");
  for (const auto& c : components) {
    for (const auto& law : c.views) law.validate();
    if (symmetric_views && !(c.views[0] == c.views[1] && c.views[1] == c.views[2])) {
      throw InputError("SyntheticSpec: symmetric views need identical laws within each component");
    }
  }
}

Eigen::VectorXd default_mixing(int k) {
  if (k < 1) throw InputError("default_mixing: k must be >= 1");
  Eigen::VectorXd pi(k);
  const double denom = static_cast<double>(k) * (k + 1);
  for (int h = 1; h <= k; ++h) pi(h - 1) = 2.0 * h / denom;
  return pi;
}

double fisher_ratio(double mu1, double mu2, double var1, double var2) {
  if (!(var1 + var2 > 0.0)) throw InputError("fisher_ratio: variances must not both vanish");
  const double d = mu1 - mu2;
  return d * d / (var1 + var2);
}

namespace {

double draw(const Law& law, std::mt19937_64& rng) {
  if (law.kind == LawKind::Gaussian) {
    std::normal_distribution<double> normal(law.mean, std::sqrt(law.variance));
    return normal(rng);
  }
  std::gamma_distribution<double> gamma(law.shape, law.scale);
  return law.shift + gamma(rng);
}

}  // namespace

MultiViewDataset sample_dataset(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::discrete_distribution<int> component(spec.mixing.data(), spec.mixing.data() + spec.mixing.size());
  MultiViewDataset data;
  for (auto& v : data.views) v.resize(spec.m, 1);
  data.labels.resize(static_cast<size_t>(spec.m));
  for (Eigen::Index i = 0; i < spec.m; ++i) {
    const int h = component(rng);
    data.labels[static_cast<size_t>(i)] = h;
    for (int v = 0; v < kNumViews; ++v) {
      data.views[static_cast<size_t>(v)](i, 0) = draw(spec.components[static_cast<size_t>(h)].views[static_cast<size_t>(v)], rng);
    }
  }
  return data;
}

double true_density(const SyntheticSpec& spec, int h, int view, double x) {
  if (h < 0 || h >= spec.k || view < 0 || view >= kNumViews) {
    throw InputError("true_density: component or view out of range");
  }
  return spec.components[static_cast<size_t>(h)].views[static_cast<size_t>(view)].pdf(x);
}

// ---- JSON ----

namespace {

json law_to_json(const Law& l) {
  if (l.kind == LawKind::Gaussian) return {{"law", "gaussian"}, {"mean", l.mean}, {"variance", l.variance}};
  return {{"law", "shifted_gamma"}, {"shape", l.shape}, {"scale", l.scale}, {"shift", l.shift}};
}

Law law_from_json(const json& j) {
  const std::string kind = j.at("law").get<std::string>();
  if (kind == "gaussian") return Law::gaussian(j.at("mean").get<double>(), j.at("variance").get<double>());
  if (kind == "shifted_gamma") {
    return Law::shifted_gamma(j.at("shape").get<double>(), j.at("scale").get<double>(), j.at("shift").get<double>());
  }
  throw InputError("unknown law '" + kind + "'");
}

const json& preset_table() {
  static const json table = json::parse(detail::kPresetJson);
  return table;
}

SyntheticSpec body_from_json(const json& j) {
  SyntheticSpec spec;
  spec.k = j.at("k").get<int>();
  spec.symmetric_views = j.value("symmetricViews", false);
  for (const auto& c : j.at("components")) {
    const auto& views = c.at("views");
    if (views.size() != kNumViews) throw InputError("component needs exactly 3 view laws");
    ComponentSpec cs;
    for (int v = 0; v < kNumViews; ++v) cs.views[static_cast<size_t>(v)] = law_from_json(views.at(static_cast<size_t>(v)));
    spec.components.push_back(cs);
  }
  return spec;
}

}  // namespace

SyntheticSpec preset(const std::string& name) {
  const json& presets = preset_table().at("presets");
  if (!presets.contains(name)) throw InputError("unknown preset '" + name + "'");
  SyntheticSpec spec = body_from_json(presets.at(name));
  spec.mixing = default_mixing(spec.k);
  return spec;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : preset_table().at("presets").items()) names.push_back(name);
  return names;
}

int preset_version() { return preset_table().at("version").get<int>(); }

json to_json(const SyntheticSpec& spec) {
  json comps = json::array();
  for (const auto& c : spec.components) {
    json views = json::array();
    for (const auto& law : c.views) views.push_back(law_to_json(law));
    comps.push_back({{"views", views}});
  }
  return {{"k", spec.k},
          {"components", comps},
          {"mixing", std::vector<double>(spec.mixing.data(), spec.mixing.data() + spec.mixing.size())},
          {"m", spec.m},
          {"seed", spec.seed},
          {"symmetricViews", spec.symmetric_views}};
}

SyntheticSpec spec_from_json(const json& j) {
  try {
    SyntheticSpec spec = j.contains("preset") ? preset(j.at("preset").get<std::string>()) : body_from_json(j);
    if (j.contains("mixing")) {
      const auto mix = j.at("mixing").get<std::vector<double>>();
      spec.mixing = Eigen::Map<const Eigen::VectorXd>(mix.data(), static_cast<Eigen::Index>(mix.size()));
    } else if (spec.mixing.size() == 0) {
      spec.mixing = default_mixing(spec.k);
    }
    spec.m = j.value("m", Eigen::Index{0});
    spec.seed = j.value("seed", std::uint64_t{0});
    // m may be left to the caller; everything else must already be consistent.
    SyntheticSpec probe = spec;
    if (probe.m == 0) probe.m = 1;
    probe.validate();
    return spec;
  } catch (const json::exception& e) {
    throw InputError(std::string("synthetic spec: ") + e.what());
  }
}

}  // namespace kspec::synth
