// kspec: generate synthetic multi-view data, fit mixtures, score them, run benchmark grids.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "kspec/csv_io.hpp"
#include "kspec/errors.hpp"
#include "kspec/experiment.hpp"
#include "kspec/metrics.hpp"
#include "kspec/recovery.hpp"
#include "kspec/rng.hpp"
#include "kspec/serialize.hpp"
#include "kspec/synth.hpp"

using nlohmann::json;
namespace ex = kspec::experiment;

namespace {

std::string g6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw kspec::InputError("cannot write '" + path + "'");
  out << text;
}

std::vector<ex::ResultRecord> read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw kspec::InputError("cannot open '" + path + "'");
  std::vector<ex::ResultRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(ex::record_from_json(json::parse(line)));
  }
  return out;
}

// The config's dataset section is optional for fit/eval; only the estimator knobs matter there.
ex::ExperimentConfig fit_config(const std::string& path, const std::string& data_path, int k_override) {
  json j = path.empty() ? json::object() : kspec::io::read_json_file(path);
  if (!j.contains("synthetic")) j["csv"] = data_path;
  if (k_override > 0) {
    j["k"] = k_override;
    if (j.contains("synthetic")) j.erase("synthetic");
    j["csv"] = data_path;
  }
  if (!j.contains("sampleSizes")) j["sampleSizes"] = {1};
  if (!j.contains("seeds")) j["seeds"] = {0};
  return ex::config_from_json(j);
}

int cmd_gen(const std::string& spec_path, std::optional<std::uint64_t> seed, long m, const std::string& out) {
  kspec::synth::SyntheticSpec spec = kspec::synth::spec_from_json(kspec::io::read_json_file(spec_path));
  if (seed) spec.seed = *seed;
  if (m > 0) spec.m = m;
  spec.validate();
  const kspec::MultiViewDataset data = kspec::synth::sample_dataset(spec);
  if (out.empty() || out == "-") {
    kspec::io::write_dataset(std::cout, data);
  } else {
    kspec::io::write_dataset(out, data);
  }
  return 0;
}

int cmd_fit(const std::string& data_path, const std::string& config_path, const std::string& estimator,
            std::optional<std::uint64_t> seed, int k, const std::string& out) {
  ex::ExperimentConfig cfg = fit_config(config_path, data_path, k);
  const kspec::MultiViewDataset data = kspec::io::ingest_csv(data_path, cfg.view_split);
  const ex::Estimator est = ex::estimator_from_string(estimator);
  const std::uint64_t base = seed ? *seed : (cfg.seeds.empty() ? 0 : cfg.seeds.front());
  const ex::FittedModel fit = ex::fit_model(cfg, est, data, kspec::derive_seed(base, {0}));
  json doc = fit.document;
  doc["k"] = cfg.k;
  doc["trainRows"] = data.size();
  if (fit.sigma_k) doc["sigmaK"] = ex::round_sig(*fit.sigma_k);
  if (fit.residual) doc["residual"] = ex::round_sig(*fit.residual);
  write_text(out, doc.dump(2) + "\n");
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_path, const std::string& spec_path,
             const std::string& config_path, const std::string& out) {
  const json doc = kspec::io::read_json_file(model_path);
  const auto model = kspec::io::model_from_json(doc);
  const ex::ExperimentConfig cfg = fit_config(config_path, data_path, model->k());
  const kspec::MultiViewDataset data = kspec::io::ingest_csv(data_path, cfg.view_split);

  json res;
  res["estimator"] = doc.at("estimator");
  res["k"] = model->k();
  res["m"] = data.size();
  json w = json::array();
  for (Eigen::Index h = 0; h < model->weights().size(); ++h) w.push_back(ex::round_sig(model->weights()(h)));
  res["weights"] = w;
  if (!spec_path.empty()) {
    const auto truth = kspec::synth::spec_from_json(kspec::io::read_json_file(spec_path));
    res["mse"] = ex::round_sig(ex::evaluate_mse(*model, truth, data, cfg.grid_points, cfg.clip_mse));
  }
  if (data.has_labels()) {
    const auto pred = kspec::recovery::map_assign(*model, data);
    res["fscore"] = ex::round_sig(kspec::metrics::fscore(data.labels, pred, model->k()));
  }
  write_text(out, res.dump() + "\n");
  return 0;
}

int cmd_bench(const std::string& config_path, std::optional<std::uint64_t> seed, int threads, std::string out,
              std::string summary) {
  ex::ExperimentConfig cfg = ex::config_from_json(kspec::io::read_json_file(config_path));
  if (seed) cfg.seeds = {*seed};
  if (out.empty()) out = cfg.output.empty() ? "records.jsonl" : cfg.output;
  if (summary.empty()) summary = out + ".summary.csv";

  std::ofstream jsonl(out);
  if (!jsonl) throw kspec::InputError("cannot write '" + out + "'");
  const auto records = ex::run_experiment(cfg, threads, [&](const ex::ResultRecord& r) {
    jsonl << ex::to_json(r).dump() << '\n';
    jsonl.flush();
    std::cerr << r.estimator << " m=" << r.m << " seed=" << r.seed << ' ' << r.status;
    if (r.mse) std::cerr << " mse=" << g6(*r.mse);
    if (r.fscore) std::cerr << " f=" << g6(*r.fscore);
    std::cerr << '\n';
  });
  write_text(summary, ex::summary_csv(records));
  std::cout << ex::summary_csv(records);
  return 0;
}

int cmd_plotdata(const std::string& records_path, const std::string& out) {
  write_text(out, ex::plot_csv(read_records(records_path)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kspec: kernel spectral estimation of nonparametric multi-view mixtures"};
  app.require_subcommand(1);

  std::string config, out, data, model, spec, estimator = "kernelSpectral", records, summary;
  std::optional<std::uint64_t> seed;
  int threads = 1, k = 0;
  long m = 0;

  auto* gen = app.add_subcommand("gen", "write a synthetic CSV from a spec JSON (full spec or {\"preset\": ...})");
  gen->add_option("--spec", spec, "spec JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--seed", seed, "override the spec seed");
  gen->add_option("--m", m, "override the sample size");
  gen->add_option("--out", out, "output CSV (default stdout)");

  auto* fit = app.add_subcommand("fit", "fit a model to a CSV dataset and write it as JSON");
  fit->add_option("--data", data, "dataset CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--config", config, "config JSON (estimator settings, viewSplit, bandwidths)");
  fit->add_option("--estimator", estimator, "kernelSpectral or emGMM");
  fit->add_option("--k", k, "number of components (overrides config)");
  fit->add_option("--seed", seed, "algorithm seed");
  fit->add_option("--out", out, "output JSON (default stdout)");

  auto* eval = app.add_subcommand("eval", "score a fitted model on a dataset");
  eval->add_option("--model", model, "model JSON from fit")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", data, "dataset CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--spec", spec, "generating spec JSON; enables the MSE")->check(CLI::ExistingFile);
  eval->add_option("--config", config, "config JSON (viewSplit, gridPoints, clipMse)");
  eval->add_option("--out", out, "output JSON (default stdout)");

  auto* bench = app.add_subcommand("bench", "run an experiment grid; JSONL records plus a CSV summary");
  bench->add_option("--config", config, "experiment config JSON")->required()->check(CLI::ExistingFile);
  bench->add_option("--seed", seed, "run a single seed instead of the config's list");
  bench->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  bench->add_option("--out", out, "JSONL records (default: config output or records.jsonl)");
  bench->add_option("--summary", summary, "summary CSV (default: <out>.summary.csv)");

  auto* plot = app.add_subcommand("plotdata", "m versus mean MSE per estimator, from JSONL records");
  plot->add_option("--records", records, "JSONL records from bench")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", out, "output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen(spec, seed, m, out);
    if (*fit) return cmd_fit(data, config, estimator, seed, k, out);
    if (*eval) return cmd_eval(model, data, spec, config, out);
    if (*bench) return cmd_bench(config, seed, threads, out, summary);
    if (*plot) return cmd_plotdata(records, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
