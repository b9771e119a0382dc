#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "kspec/errors.hpp"
#include "kspec/synth.hpp"

using namespace kspec;
using synth::Law;

namespace {

synth::SyntheticSpec sized(const std::string& name, Eigen::Index m, std::uint64_t seed) {
  synth::SyntheticSpec s = synth::preset(name);
  s.m = m;
  s.seed = seed;
  return s;
}

synth::SyntheticSpec single_law(const Law& law, Eigen::Index m, std::uint64_t seed) {
  synth::SyntheticSpec s;
  s.k = 1;
  s.components = {synth::ComponentSpec{{law, law, law}}};
  s.mixing = Eigen::VectorXd::Ones(1);
  s.m = m;
  s.seed = seed;
  return s;
}

double mean_of(const Points& x) { return x.col(0).mean(); }

double var_of(const Points& x) {
  const double mu = mean_of(x);
  return (x.col(0).array() - mu).square().sum() / static_cast<double>(x.rows() - 1);
}

double trapezoid(const Law& law, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double s = 0.5 * (law.pdf(lo) + law.pdf(hi));
  for (int i = 1; i < n; ++i) s += law.pdf(lo + i * h);
  return s * h;
}

}  // namespace

TEST(DefaultMixing, SmallK) {
  EXPECT_DOUBLE_EQ(synth::default_mixing(1)(0), 1.0);
  const Eigen::VectorXd p2 = synth::default_mixing(2);
  EXPECT_NEAR(p2(0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(p2(1), 2.0 / 3.0, 1e-15);
  const Eigen::VectorXd p3 = synth::default_mixing(3);
  EXPECT_NEAR(p3(0), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(p3(1), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(p3(2), 1.0 / 2.0, 1e-15);
  for (int k = 1; k <= 10; ++k) EXPECT_NEAR(synth::default_mixing(k).sum(), 1.0, 1e-14);
  EXPECT_THROW(synth::default_mixing(0), InputError);
}

TEST(FisherRatio, Formula) {
  EXPECT_EQ(synth::fisher_ratio(1.5, 1.5, 1.0, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(synth::fisher_ratio(0.0, 2.0, 1.0, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(synth::fisher_ratio(3.0, -1.0, 0.5, 1.5), synth::fisher_ratio(-1.0, 3.0, 1.5, 0.5));
  EXPECT_THROW(synth::fisher_ratio(0, 1, 0, 0), InputError);
}

TEST(Law, ValidateRanges) {
  EXPECT_THROW(Law::gaussian(0.0, 0.0).validate(), InputError);
  EXPECT_THROW(Law::shifted_gamma(1.5, 1.0, 0.0).validate(), InputError);
  EXPECT_THROW(Law::shifted_gamma(0.0, 1.0, 0.0).validate(), InputError);
  EXPECT_THROW(Law::shifted_gamma(0.5, -1.0, 0.0).validate(), InputError);
  EXPECT_NO_THROW(Law::shifted_gamma(1.0, 2.0, -3.0).validate());
}

TEST(TrueDensity, StandardNormalMode) {
  EXPECT_NEAR(Law::gaussian(0.0, 1.0).pdf(0.0), 0.398942280401433, 1e-15);
}

TEST(TrueDensity, ShiftedGammaSupport) {
  const Law g = Law::shifted_gamma(0.7, 1.3, 2.0);
  EXPECT_EQ(g.pdf(1.999), 0.0);
  EXPECT_EQ(g.pdf(-10.0), 0.0);
  EXPECT_GT(g.pdf(2.5), 0.0);
  // Standard shifted form with exponent in (x - mu): exponential law when d = 1.
  const Law e = Law::shifted_gamma(1.0, 2.0, 1.0);
  EXPECT_NEAR(e.pdf(4.0), 0.5 * std::exp(-1.5), 1e-15);
}

TEST(TrueDensity, IntegratesToOne) {
  EXPECT_NEAR(trapezoid(Law::gaussian(1.0, 0.3), -10, 12, 200000), 1.0, 1e-3);
  EXPECT_NEAR(trapezoid(Law::shifted_gamma(1.0, 1.5, -1.0), -1.0, 60, 400000), 1.0, 1e-3);
  // d < 1 has an integrable singularity at the shift; u = (x - mu)^d makes the integrand smooth.
  const Law g = Law::shifted_gamma(0.6, 1.2, 0.5);
  const double d = 0.6, umax = std::pow(60.0, d);
  const int n = 200000;
  double mass = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = (i + 0.5) * umax / n;
    mass += g.pdf(0.5 + std::pow(u, 1.0 / d)) * std::pow(u, 1.0 / d - 1.0) / d * (umax / n);
  }
  EXPECT_NEAR(mass, 1.0, 1e-3);
}

TEST(TrueDensity, DispatchesByComponentAndView) {
  const auto spec = sized("gaussgamma_k2", 10, 0);
  for (int h = 0; h < 2; ++h)
    for (int v = 0; v < kNumViews; ++v)
      EXPECT_EQ(synth::true_density(spec, h, v, 1.25),
                spec.components[static_cast<size_t>(h)].views[static_cast<size_t>(v)].pdf(1.25));
  EXPECT_THROW(synth::true_density(spec, 2, 0, 0.0), InputError);
  EXPECT_THROW(synth::true_density(spec, 0, 3, 0.0), InputError);
}

TEST(SampleDataset, DegenerateMixingGivesOneLabel) {
  synth::SyntheticSpec s = sized("gaussian_k2", 500, 3);
  s.mixing = Eigen::Vector2d(1.0, 0.0);
  const auto d = synth::sample_dataset(s);
  for (int label : d.labels) EXPECT_EQ(label, 0);
}

TEST(SampleDataset, GaussianMomentsWithinThreeStandardErrors) {
  const Law law = Law::gaussian(-1.5, 2.0);
  const auto d = synth::sample_dataset(single_law(law, 100000, 4));
  const double n = 100000.0;
  for (const auto& x : d.views) {
    EXPECT_NEAR(mean_of(x), -1.5, 3.0 * std::sqrt(2.0 / n));
    // Var of the sample variance is 2 sigma^4 / (n - 1) for Gaussians.
    EXPECT_NEAR(var_of(x), 2.0, 3.0 * std::sqrt(2.0 * 4.0 / (n - 1)));
  }
}

TEST(SampleDataset, ShiftedGammaMeanWithinThreeStandardErrors) {
  const Law law = Law::shifted_gamma(0.5, 2.0, 1.0);
  EXPECT_DOUBLE_EQ(law.expectation(), 2.0);
  EXPECT_DOUBLE_EQ(law.var(), 2.0);
  const auto d = synth::sample_dataset(single_law(law, 100000, 5));
  for (const auto& x : d.views) {
    EXPECT_NEAR(mean_of(x), 1.0 + 0.5 * 2.0, 3.0 * std::sqrt(law.var() / 1e5));
    EXPECT_GE(x.minCoeff(), 1.0);
  }
}

TEST(SampleDataset, ReproducibleGivenSeed) {
  const auto a = synth::sample_dataset(sized("gaussgamma_k3", 300, 6));
  const auto b = synth::sample_dataset(sized("gaussgamma_k3", 300, 6));
  const auto c = synth::sample_dataset(sized("gaussgamma_k3", 300, 7));
  for (int v = 0; v < kNumViews; ++v) EXPECT_EQ(a.views[static_cast<size_t>(v)], b.views[static_cast<size_t>(v)]);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_NE(a.views[0], c.views[0]);
}

TEST(SampleDataset, LabelFrequenciesTrackMixing) {
  const Eigen::Index m = 40000;
  const auto spec = sized("gaussian_k4", m, 8);
  const auto d = synth::sample_dataset(spec);
  std::vector<double> counts(4, 0.0);
  for (int l : d.labels) counts[static_cast<size_t>(l)] += 1.0;
  for (int h = 0; h < 4; ++h) {
    const double p = spec.mixing(h);
    EXPECT_NEAR(counts[static_cast<size_t>(h)] / m, p, 4.0 * std::sqrt(p * (1 - p) / m));
  }
}

TEST(SampleDataset, ViewsConditionallyIndependent) {
  const auto d = synth::sample_dataset(sized("gaussgamma_k2", 20000, 9));
  for (int h = 0; h < 2; ++h) {
    std::vector<Eigen::Index> rows;
    for (size_t i = 0; i < d.labels.size(); ++i)
      if (d.labels[i] == h) rows.push_back(static_cast<Eigen::Index>(i));
    const MultiViewDataset sub = d.subset(rows);
    const double mh = static_cast<double>(rows.size());
    for (int a = 0; a < kNumViews; ++a) {
      for (int b = a + 1; b < kNumViews; ++b) {
        const Eigen::ArrayXd x = sub.views[static_cast<size_t>(a)].col(0).array() - mean_of(sub.views[static_cast<size_t>(a)]);
        const Eigen::ArrayXd y = sub.views[static_cast<size_t>(b)].col(0).array() - mean_of(sub.views[static_cast<size_t>(b)]);
        const double r = (x * y).sum() / std::sqrt(x.square().sum() * y.square().sum());
        EXPECT_LE(std::abs(r), 4.0 / std::sqrt(mh));
      }
    }
  }
}

TEST(SampleDataset, InvalidSpecRejected) {
  synth::SyntheticSpec s = sized("gaussian_k2", 10, 0);
  s.mixing = Eigen::Vector2d(0.7, 0.7);
  EXPECT_THROW(synth::sample_dataset(s), InputError);
  s = sized("gaussian_k2", 0, 0);
  EXPECT_THROW(synth::sample_dataset(s), InputError);
  s = sized("gaussian_k2", 10, 0);
  s.symmetric_views = true;
  EXPECT_THROW(s.validate(), InputError);
}

TEST(Presets, AdjacentComponentsWellSeparated) {
  ASSERT_EQ(synth::preset_version(), 1);
  const auto names = synth::preset_names();
  EXPECT_EQ(names.size(), 16u);
  for (const auto& name : names) {
    const auto spec = synth::preset(name);
    ASSERT_EQ(static_cast<int>(spec.components.size()), spec.k) << name;
    EXPECT_LE((spec.mixing - synth::default_mixing(spec.k)).norm(), 1e-15) << name;
    for (int v = 0; v < kNumViews; ++v) {
      std::vector<Law> laws;
      for (const auto& c : spec.components) laws.push_back(c.views[static_cast<size_t>(v)]);
      std::sort(laws.begin(), laws.end(), [](const Law& a, const Law& b) { return a.expectation() < b.expectation(); });
      for (size_t i = 1; i < laws.size(); ++i) {
        EXPECT_GE(synth::fisher_ratio(laws[i - 1].expectation(), laws[i].expectation(), laws[i - 1].var(), laws[i].var()), 3.0)
            << name << " view " << v;
      }
    }
    if (spec.symmetric_views) {
      for (const auto& c : spec.components) {
        EXPECT_EQ(c.views[0], c.views[1]);
        EXPECT_EQ(c.views[0], c.views[2]);
      }
    }
  }
  EXPECT_THROW(synth::preset("nope"), InputError);
}

TEST(Presets, GammaFamiliesAreSkewed) {
  for (const auto& c : synth::preset("gaussgamma_k3").components) {
    for (const auto& law : c.views) {
      if (law.kind == synth::LawKind::ShiftedGamma) EXPECT_LE(law.shape, 1.0);
    }
  }
}

TEST(SpecJson, RoundTripAndPresetReference) {
  synth::SyntheticSpec s = sized("gaussgamma_k3", 123, 77);
  s.mixing = Eigen::Vector3d(0.2, 0.3, 0.5);
  const auto back = synth::spec_from_json(synth::to_json(s));
  EXPECT_EQ(back.k, s.k);
  EXPECT_EQ(back.m, s.m);
  EXPECT_EQ(back.seed, s.seed);
  EXPECT_EQ(back.mixing, s.mixing);
  EXPECT_EQ(back.components, s.components);

  const auto ref = synth::spec_from_json(nlohmann::json{{"preset", "gaussian_k2"}, {"m", 50}, {"seed", 4}});
  EXPECT_EQ(ref.m, 50);
  EXPECT_EQ(ref.seed, 4u);
  EXPECT_EQ(ref.components, synth::preset("gaussian_k2").components);
  EXPECT_THROW(synth::spec_from_json(nlohmann::json{{"preset", "gaussian_k2"}, {"mixing", {0.5}}}), InputError);
}
