#include "kspec/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "kspec/cv.hpp"
#include "kspec/em_gmm.hpp"
#include "kspec/errors.hpp"
#include "kspec/metrics.hpp"
#include "kspec/rng.hpp"
#include "kspec/serialize.hpp"
#include "kspec/tensor_power.hpp"

namespace kspec::experiment {

using nlohmann::json;

std::string to_string(Estimator e) { return e == Estimator::KernelSpectral ? "kernelSpectral" : "emGMM"; }

Estimator estimator_from_string(const std::string& name) {
  if (name == "kernelSpectral") return Estimator::KernelSpectral;
  if (name == "emGMM") return Estimator::EmGmm;
  throw InputError("unknown estimator '" + name + "'");
}

namespace {

std::uint64_t estimator_code(Estimator e) { return e == Estimator::KernelSpectral ? 1 : 2; }

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double x) {
  if (!std::isfinite(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!synthetic && csv_path.empty()) throw InputError("config: need a synthetic spec or a CSV path");
  if (k < 1) throw InputError("config: k must be >= 1");
  if (synthetic && synthetic->k != k) throw InputError("config: k disagrees with the synthetic spec");
  if (estimators.empty()) throw InputError("config: no estimators");
  if (sample_sizes.empty() || seeds.empty()) throw InputError("config: need sample sizes and seeds");
  for (auto m : sample_sizes) {
    if (m < 1) throw InputError("config: sample sizes must be positive");
  }
  if (cv_folds < 2) throw InputError("config: cvFolds must be >= 2");
  if (grid_points < 2) throw InputError("config: gridPoints must be >= 2");
  if (bandwidth_grid) {
    for (const auto& g : *bandwidth_grid) {
      if (g.empty() || g.size() != (*bandwidth_grid)[0].size()) throw InputError("config: bandwidth grids must be nonempty and equal length");
      for (double s : g) {
        if (!(s > 0.0)) throw InputError("config: bandwidths must be positive");
      }
    }
  } else if (bandwidth_multipliers.empty()) {
    throw InputError("config: empty bandwidth multiplier grid");
  }
}

int ExperimentConfig::effective_em_restarts() const {
  if (em_restarts > 0) return em_restarts;
  return synthetic ? 10 : 20;
}

ExperimentConfig config_from_json(const json& j) {
  try {
    ExperimentConfig cfg;
    if (j.contains("synthetic")) cfg.synthetic = synth::spec_from_json(j.at("synthetic"));
    cfg.csv_path = j.value("csv", std::string());
    if (j.contains("viewSplit")) {
      const auto& vs = j.at("viewSplit");
      if (vs.size() != kNumViews) throw InputError("config: viewSplit needs 3 column groups");
      for (int v = 0; v < kNumViews; ++v) cfg.view_split[static_cast<size_t>(v)] = vs.at(static_cast<size_t>(v)).get<std::vector<int>>();
    }
    cfg.k = j.contains("k") ? j.at("k").get<int>() : (cfg.synthetic ? cfg.synthetic->k : 2);
    if (j.contains("estimators")) {
      cfg.estimators.clear();
      for (const auto& e : j.at("estimators")) cfg.estimators.push_back(estimator_from_string(e.get<std::string>()));
    }
    cfg.sample_sizes = j.at("sampleSizes").get<std::vector<Eigen::Index>>();
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    cfg.cv_folds = j.value("cvFolds", 5);
    cfg.bandwidth_multipliers = j.value("bandwidthMultipliers", cv::default_multipliers());
    if (j.contains("bandwidthGrid")) {
      std::array<std::vector<double>, kNumViews> g;
      const auto& bg = j.at("bandwidthGrid");
      if (bg.size() != kNumViews) throw InputError("config: bandwidthGrid needs one list per view");
      for (int v = 0; v < kNumViews; ++v) g[static_cast<size_t>(v)] = bg.at(static_cast<size_t>(v)).get<std::vector<double>>();
      cfg.bandwidth_grid = g;
    }
    const std::string pipe = j.value("pipeline", std::string("multiview"));
    if (pipe != "multiview" && pipe != "symmetric") throw InputError("config: pipeline must be multiview or symmetric");
    cfg.symmetric_pipeline = pipe == "symmetric";
    if (j.contains("power")) {
      const auto& p = j.at("power");
      cfg.num_inits = p.value("numInits", 0);
      cfg.num_iters = p.value("numIters", 100);
      cfg.deflation_threshold = p.value("deflationThreshold", 0.0);
    }
    if (j.contains("lowRank")) {
      cfg.low_rank.rel_tol = j.at("lowRank").value("relTol", cfg.low_rank.rel_tol);
      cfg.low_rank.max_rank = j.at("lowRank").value("maxRank", cfg.low_rank.max_rank);
    }
    if (j.contains("em")) {
      const auto& e = j.at("em");
      cfg.em_restarts = e.value("restarts", 0);
      cfg.em_tol = e.value("tol", 1e-8);
      cfg.em_max_iters = e.value("maxIters", 500);
    }
    cfg.grid_points = j.value("gridPoints", 200);
    cfg.clip_mse = j.value("clipMse", false);
    cfg.output = j.value("output", std::string());
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  if (cfg.synthetic) j["synthetic"] = synth::to_json(*cfg.synthetic);
  if (!cfg.csv_path.empty()) j["csv"] = cfg.csv_path;
  if (!cfg.view_split[0].empty()) j["viewSplit"] = cfg.view_split;
  j["k"] = cfg.k;
  json ests = json::array();
  for (auto e : cfg.estimators) ests.push_back(to_string(e));
  j["estimators"] = ests;
  j["sampleSizes"] = cfg.sample_sizes;
  j["seeds"] = cfg.seeds;
  j["cvFolds"] = cfg.cv_folds;
  j["bandwidthMultipliers"] = cfg.bandwidth_multipliers;
  if (cfg.bandwidth_grid) j["bandwidthGrid"] = *cfg.bandwidth_grid;
  j["pipeline"] = cfg.symmetric_pipeline ? "symmetric" : "multiview";
  j["power"] = {{"numInits", cfg.num_inits}, {"numIters", cfg.num_iters}, {"deflationThreshold", cfg.deflation_threshold}};
  j["lowRank"] = {{"relTol", cfg.low_rank.rel_tol}, {"maxRank", cfg.low_rank.max_rank}};
  j["em"] = {{"restarts", cfg.em_restarts}, {"tol", cfg.em_tol}, {"maxIters", cfg.em_max_iters}};
  j["gridPoints"] = cfg.grid_points;
  j["clipMse"] = cfg.clip_mse;
  if (!cfg.output.empty()) j["output"] = cfg.output;
  return j;
}

double round_sig(double x, int digits) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return std::strtod(buf, nullptr);
}

json to_json(const ResultRecord& r) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"estimator", r.estimator}, {"k", r.k},          {"m", r.m},
          {"seed", r.seed},           {"bandwidths", r.bandwidths},
          {"mse", opt(r.mse)},        {"fscore", opt(r.fscore)},
          {"wallTimeMs", r.wall_time_ms},
          {"weights", r.weights},     {"sigmaK", opt(r.sigma_k)},
          {"residual", opt(r.residual)},
          {"status", r.status},       {"error", r.error}};
}

ResultRecord record_from_json(const json& j) {
  auto opt = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
  };
  ResultRecord r;
  r.estimator = j.at("estimator").get<std::string>();
  r.k = j.at("k").get<int>();
  r.m = j.at("m").get<Eigen::Index>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.bandwidths = j.at("bandwidths").get<std::vector<double>>();
  r.mse = opt("mse");
  r.fscore = opt("fscore");
  r.wall_time_ms = j.at("wallTimeMs").get<double>();
  r.weights = j.at("weights").get<std::vector<double>>();
  r.sigma_k = opt("sigmaK");
  r.residual = opt("residual");
  r.status = j.at("status").get<std::string>();
  r.error = j.value("error", std::string());
  return r;
}

FittedModel fit_model(const ExperimentConfig& cfg, Estimator est, const MultiViewDataset& data,
                      std::uint64_t algo_seed) {
  FittedModel out;
  if (est == Estimator::EmGmm) {
    em::EmOptions opt;
    opt.k = cfg.k;
    opt.restarts = cfg.effective_em_restarts();
    opt.tol = cfg.em_tol;
    opt.max_iters = cfg.em_max_iters;
    opt.seed = algo_seed;
    em::EmResult res = em::em_gmm(data, opt);
    auto model = std::make_unique<em::GaussianMixture>(res.model());
    out.document = io::to_json(*model);
    out.model = std::move(model);
    return out;
  }

  tensor::PowerConfig power = tensor::PowerConfig::defaults(cfg.k, derive_seed(algo_seed, {1}));
  if (cfg.num_inits > 0) power.num_inits = cfg.num_inits;
  power.num_iters = cfg.num_iters;
  power.deflation_threshold = cfg.deflation_threshold;

  const auto grids = cfg.bandwidth_grid ? *cfg.bandwidth_grid : cv::bandwidth_grid(data, cfg.bandwidth_multipliers);
  std::array<double, kNumViews> bw{};
  if (grids[0].size() == 1) {
    for (int v = 0; v < kNumViews; ++v) bw[static_cast<size_t>(v)] = grids[static_cast<size_t>(cfg.symmetric_pipeline ? 0 : v)][0];
  } else {
    cv::CvOptions copt;
    copt.folds = cfg.cv_folds;
    copt.k = cfg.k;
    copt.power = power;
    copt.low_rank = cfg.low_rank;
    copt.fold_seed = derive_seed(algo_seed, {2});
    copt.symmetric = cfg.symmetric_pipeline;
    bw = cv::cross_validate_bandwidth(data, grids, copt).bandwidths;
  }

  pipeline::KernelFit fit = cfg.symmetric_pipeline
                                ? pipeline::fit_symmetric(data, kernel::KernelSpec::rbf(bw[0]), cfg.k, power, cfg.low_rank)
                                : pipeline::fit_multiview(data,
                                                          {kernel::KernelSpec::rbf(bw[0]), kernel::KernelSpec::rbf(bw[1]),
                                                           kernel::KernelSpec::rbf(bw[2])},
                                                          cfg.k, power, cfg.low_rank);
  out.bandwidths.assign(bw.begin(), bw.end());
  out.sigma_k = fit.sigma_k();
  out.residual = fit.residual();
  auto model = std::make_unique<recovery::KernelMixtureModel>(std::move(fit.model));
  out.document = io::to_json(*model);
  out.document["bandwidths"] = out.bandwidths;
  out.model = std::move(model);
  return out;
}

double evaluate_mse(const recovery::MultiViewModel& model, const synth::SyntheticSpec& truth,
                    const MultiViewDataset& data, int grid_points, bool clip) {
  if (model.k() != truth.k) throw InputError("evaluate_mse: component counts disagree");
  std::array<Eigen::MatrixXd, kNumViews> p_true, p_est;
  for (int v = 0; v < kNumViews; ++v) {
    const auto uv = static_cast<size_t>(v);
    const Eigen::VectorXd grid = metrics::test_grid(data.views[uv], grid_points);
    p_true[uv].resize(grid.size(), truth.k);
    for (int h = 0; h < truth.k; ++h) {
      for (Eigen::Index j = 0; j < grid.size(); ++j) p_true[uv](j, h) = synth::true_density(truth, h, v, grid(j));
    }
    p_est[uv] = model.view_density(v, grid);
    if (clip) p_est[uv] = p_est[uv].cwiseMax(0.0);
  }
  return metrics::mse_metric(p_true, p_est, truth.mixing).value;
}

MultiViewDataset cell_dataset(const ExperimentConfig& cfg, Eigen::Index m, std::uint64_t seed) {
  const std::uint64_t data_seed = derive_seed(seed, {static_cast<std::uint64_t>(m)});
  if (cfg.synthetic) {
    synth::SyntheticSpec spec = *cfg.synthetic;
    spec.m = m;
    spec.seed = data_seed;
    return synth::sample_dataset(spec);
  }
  MultiViewDataset all = io::ingest_csv(cfg.csv_path, cfg.view_split);
  if (m >= all.size()) return all;
  std::vector<Eigen::Index> idx(static_cast<size_t>(all.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::mt19937_64 rng(data_seed);
  for (Eigen::Index i = 0; i < m; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(i, all.size() - 1);
    std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(pick(rng))]);
  }
  idx.resize(static_cast<size_t>(m));
  std::sort(idx.begin(), idx.end());
  return all.subset(idx);
}

ResultRecord run_cell(const ExperimentConfig& cfg, Estimator est, Eigen::Index m, std::uint64_t seed) {
  ResultRecord r;
  r.estimator = to_string(est);
  r.k = cfg.k;
  r.m = m;
  r.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    const MultiViewDataset data = cell_dataset(cfg, m, seed);
    r.m = data.size();
    const std::uint64_t algo_seed = derive_seed(seed, {static_cast<std::uint64_t>(m), estimator_code(est)});
    const FittedModel fit = fit_model(cfg, est, data, algo_seed);
    for (double b : fit.bandwidths) r.bandwidths.push_back(round_sig(b));
    for (Eigen::Index h = 0; h < fit.model->weights().size(); ++h) r.weights.push_back(round_sig(fit.model->weights()(h)));
    if (fit.sigma_k) r.sigma_k = round_sig(*fit.sigma_k);
    if (fit.residual) r.residual = round_sig(*fit.residual);
    if (cfg.synthetic) {
      synth::SyntheticSpec truth = *cfg.synthetic;
      r.mse = round_sig(evaluate_mse(*fit.model, truth, data, cfg.grid_points, cfg.clip_mse));
    }
    if (data.has_labels()) {
      r.fscore = round_sig(metrics::fscore(data.labels, recovery::map_assign(*fit.model, data), cfg.k));
    }
  } catch (const std::exception& e) {
    r.status = "error";
    r.error = e.what();
    r.bandwidths.clear();
    r.weights.clear();
    r.mse.reset();
    r.fscore.reset();
    r.sigma_k.reset();
    r.residual.reset();
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  r.wall_time_ms = round_sig(ms);
  return r;
}

std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg, int threads,
                                         const std::function<void(const ResultRecord&)>& sink) {
  cfg.validate();
  struct Cell {
    Estimator est;
    Eigen::Index m;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (auto est : cfg.estimators) {
    for (auto m : cfg.sample_sizes) {
      for (auto seed : cfg.seeds) cells.push_back({est, m, seed});
    }
  }

  std::vector<std::optional<ResultRecord>> results(cells.size());
  std::atomic<size_t> next{0};
  std::mutex mu;
  size_t emitted = 0;
  auto worker = [&] {
    for (size_t i = next++; i < cells.size(); i = next++) {
      ResultRecord r = run_cell(cfg, cells[i].est, cells[i].m, cells[i].seed);
      std::lock_guard<std::mutex> lock(mu);
      results[i] = std::move(r);
      while (emitted < results.size() && results[emitted]) {
        if (sink) sink(*results[emitted]);
        ++emitted;
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(cells.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::vector<ResultRecord> out;
  out.reserve(results.size());
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

std::string summary_csv(const std::vector<ResultRecord>& records) {
  std::map<std::tuple<std::string, int, Eigen::Index>, std::vector<const ResultRecord*>> groups;
  std::vector<std::tuple<std::string, int, Eigen::Index>> order;
  for (const auto& r : records) {
    auto key = std::make_tuple(r.estimator, r.k, r.m);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  std::ostringstream out;
  out << "estimator,k,m,runs,failed,mean_mse,median_mse,mean_fscore\n";
  for (const auto& key : order) {
    std::vector<double> mse, fs;
    int failed = 0;
    for (const auto* r : groups[key]) {
      if (r->status != "ok") ++failed;
      if (r->mse) mse.push_back(*r->mse);
      if (r->fscore) fs.push_back(*r->fscore);
    }
    auto mean = [](const std::vector<double>& v) {
      return v.empty() ? std::nan("") : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    out << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ',' << groups[key].size() << ','
        << failed << ',' << fmt(mean(mse)) << ',' << fmt(median(mse)) << ',' << fmt(mean(fs)) << '\n';
  }
  return out.str();
}

std::string plot_csv(const std::vector<ResultRecord>& records) {
  std::vector<std::string> estimators;
  std::set<Eigen::Index> sizes;
  std::map<std::pair<std::string, Eigen::Index>, std::vector<double>> mse;
  for (const auto& r : records) {
    if (std::find(estimators.begin(), estimators.end(), r.estimator) == estimators.end()) estimators.push_back(r.estimator);
    sizes.insert(r.m);
    if (r.mse) mse[{r.estimator, r.m}].push_back(*r.mse);
  }
  std::ostringstream out;
  out << "m";
  for (const auto& e : estimators) out << ',' << e;
  out << '\n';
  for (auto m : sizes) {
    out << m;
    for (const auto& e : estimators) {
      const auto& v = mse[{e, m}];
      out << ',' << (v.empty() ? std::string("nan") : fmt(std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size())));
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace kspec::experiment
