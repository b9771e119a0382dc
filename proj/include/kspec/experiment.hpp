#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kspec/csv_io.hpp"
#include "kspec/cv.hpp"
#include "kspec/pipeline.hpp"
#include "kspec/recovery.hpp"
#include "kspec/synth.hpp"

namespace kspec::experiment {

enum class Estimator { KernelSpectral, EmGmm };
std::string to_string(Estimator e);
Estimator estimator_from_string(const std::string& name);

struct ExperimentConfig {
  std::optional<synth::SyntheticSpec> synthetic;  ///< m and seed are set per cell
  std::string csv_path;
  io::ViewSplit view_split;
  int k = 2;
  std::vector<Estimator> estimators{Estimator::KernelSpectral, Estimator::EmGmm};
  std::vector<Eigen::Index> sample_sizes;
  std::vector<std::uint64_t> seeds;

  int cv_folds = 5;
  std::vector<double> bandwidth_multipliers = cv::default_multipliers();  ///< on the median heuristic
  std::optional<std::array<std::vector<double>, kNumViews>> bandwidth_grid;  ///< absolute, per view
  bool symmetric_pipeline = false;

  int num_inits = 0;  ///< 0: default for k
  int num_iters = 100;
  double deflation_threshold = 0.0;
  pipeline::LowRankOptions low_rank;

  int em_restarts = 0;  ///< 0: 10 for synthetic data, 20 for ingested data
  double em_tol = 1e-8;
  int em_max_iters = 500;

  int grid_points = 200;
  bool clip_mse = false;
  std::string output;

  void validate() const;
  int effective_em_restarts() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);

struct ResultRecord {
  std::string estimator;
  int k = 0;
  Eigen::Index m = 0;
  std::uint64_t seed = 0;
  std::vector<double> bandwidths;
  std::optional<double> mse;
  std::optional<double> fscore;
  double wall_time_ms = 0.0;
  std::vector<double> weights;
  std::optional<double> sigma_k;
  std::optional<double> residual;
  std::string status = "ok";
  std::string error;

  bool operator==(const ResultRecord&) const = default;
};

/// Rounds to `digits` significant digits (the precision of every emitted number).
double round_sig(double x, int digits = 6);

nlohmann::json to_json(const ResultRecord& r);
ResultRecord record_from_json(const nlohmann::json& j);

/// A fitted model plus the bookkeeping that goes into a record.
struct FittedModel {
  std::unique_ptr<recovery::MultiViewModel> model;
  nlohmann::json document;
  std::vector<double> bandwidths;
  std::optional<double> sigma_k;
  std::optional<double> residual;
};

/// Fits one estimator on `data`; the kernel estimator cross-validates its bandwidths first.
FittedModel fit_model(const ExperimentConfig& cfg, Estimator est, const MultiViewDataset& data,
                      std::uint64_t algo_seed);

/// Weighted L2 error against the generating densities on per-view test grids built from `data`.
double evaluate_mse(const recovery::MultiViewModel& model, const synth::SyntheticSpec& truth,
                    const MultiViewDataset& data, int grid_points = 200, bool clip = false);

/// Dataset of one cell: a synthetic draw of size m, or a seeded subsample of the CSV file.
MultiViewDataset cell_dataset(const ExperimentConfig& cfg, Eigen::Index m, std::uint64_t seed);

ResultRecord run_cell(const ExperimentConfig& cfg, Estimator est, Eigen::Index m, std::uint64_t seed);

/// Cells in (estimator, m, seed) order. Cells run on `threads` workers; the sink receives records
/// in cell order as soon as each prefix is complete.
std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg, int threads = 1,
                                         const std::function<void(const ResultRecord&)>& sink = {});

/// estimator,k,m,runs,failed,mean_mse,median_mse,mean_fscore
std::string summary_csv(const std::vector<ResultRecord>& records);
/// m then one mean-MSE column per estimator.
std::string plot_csv(const std::vector<ResultRecord>& records);

}  // namespace kspec::experiment
