#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "vasifit/config.hpp"

namespace {

using namespace vasifit;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSynthesis = 3;
constexpr int kExitEstimation = 4;
constexpr int kExitIo = 5;

int exit_code_for(const Error& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const SynthesisError*>(&e)) return kExitSynthesis;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const SchemaError*>(&e)) return kExitIo;
  return kExitEstimation;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw IoError("write failed for '" + path + "'");
}

void write_sidecar(const RunConfig& cfg, const std::string& out_path) {
  write_text(out_path + ".config.json", run_config_to_json(cfg) + "\n");
}

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<int> replications;
};

RunConfig resolve_config(const CommonOpts& opts) {
  RunConfig cfg = load_run_config(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.replications) cfg.replications = *opts.replications;
  if (opts.workers) {
    cfg.workers = *opts.workers;
  } else if (const char* env = std::getenv("VASIFIT_WORKERS")) {
    try {
      cfg.workers = std::stoi(env);
    } catch (...) {
      throw ConfigError("VASIFIT_WORKERS is not an integer");
    }
    if (cfg.workers < 1) throw ConfigError("VASIFIT_WORKERS must be >= 1");
  }
  return cfg;
}

int cmd_simulate(const CommonOpts& opts, const std::string& out_path) {
  const RunConfig cfg = resolve_config(opts);
  const IncrementArray inc =
      sample_increments(cfg.noise, cfg.n_steps, cfg.h, cfg.seed);
  const Vector r0 = cfg.r0 ? *cfg.r0 : cfg.model.b;
  const PathGrid path = simulate_path(cfg.model, inc, r0);
  if (path.stiffness_warning) {
    std::cerr << "warning: h * ||theta|| >= 2, the explicit Euler step may "
                 "be unstable\n";
  }
  write_path_csv(path, out_path);
  write_sidecar(cfg, out_path);
  return kExitOk;
}

int cmd_fit(const CommonOpts& opts, const std::string& in_path,
            const std::string& out_path) {
  const RunConfig cfg = resolve_config(opts);
  const PathGrid path = read_path_csv(in_path);
  try {
    const FitResult result = fit(path, cfg.noise, cfg.estimation);
    write_text(out_path, fit_result_to_json(result) + "\n");
    write_sidecar(cfg, out_path);
  } catch (const FitError& e) {
    // Still write the diagnostics that were computed before the failure.
    write_text(out_path, fit_result_to_json(e.partial) + "\n");
    write_sidecar(cfg, out_path);
    std::cerr << "error: " << e.what() << "\n";
    return kExitEstimation;
  }
  return kExitOk;
}

int cmd_mc(const CommonOpts& opts, const std::string& out_dir) {
  const RunConfig cfg = resolve_config(opts);
  const McConfig mc = cfg.to_mc_config();
  const McReport report = run_mc(mc);
  write_text(out_dir + "/report.json", mc_report_to_json(report, mc) + "\n");
  write_mc_estimates_csv(report, out_dir + "/estimates.csv");
  write_mc_histograms_csv(report, out_dir + "/histograms.csv");
  write_sidecar(cfg, out_dir + "/report.json");
  return kExitOk;
}

int cmd_predict(const CommonOpts& opts, const std::string& data_path,
                const std::string& out_path) {
  const RunConfig cfg = resolve_config(opts);
  if (cfg.value_columns.empty()) {
    throw ConfigError("data.value_columns must name the rate columns");
  }
  const RateSeries series =
      load_csv(data_path, cfg.date_column, cfg.value_columns, cfg.data_h);
  if (static_cast<int>(series.dates.size()) < cfg.min_rows) {
    throw InsufficientDataError(
        "data has " + std::to_string(series.dates.size()) +
        " usable rows, fewer than the required " +
        std::to_string(cfg.min_rows));
  }
  if (series.dropped_rows > 0) {
    std::cerr << "note: dropped " << series.dropped_rows
              << " rows with missing values\n";
  }
  const FitResult result = fit(series.to_path(), cfg.noise, cfg.estimation);
  const PredictionReport report =
      predict_one_step(result, series, cfg.holdout_fraction);
  write_prediction_csv(report, out_path);
  write_text(out_path + ".metrics.json",
             prediction_metrics_json(report) + "\n");
  write_text(out_path + ".fit.json", fit_result_to_json(result) + "\n");
  write_sidecar(cfg, out_path);
  return kExitOk;
}

int cmd_noise_check(const CommonOpts& opts, const std::string& out_path,
                    long long n) {
  const RunConfig cfg = resolve_config(opts);
  const Matrix ratio = quadratic_variation_ratio(cfg.noise, n, cfg.seed);
  const double dev =
      (ratio - Matrix::Identity(ratio.rows(), ratio.cols())).cwiseAbs()
          .maxCoeff();

  // Increment-variance check against the exact covariance at the step.
  const double h = 0.01;
  const IncrementArray inc = sample_increments(cfg.noise, n, h, cfg.seed);
  const Matrix v = cov_V(cfg.noise, h);
  nlohmann::json j;
  j["n"] = n;
  j["qv_ratio_max_abs_dev_from_identity"] = dev;
  std::vector<double> var_ratio;
  for (int i = 0; i < cfg.noise.d; ++i) {
    const double sample_var =
        inc.values.row(i).squaredNorm() / static_cast<double>(n);
    var_ratio.push_back(sample_var / v(i, i));
  }
  j["increment_variance_ratio"] = var_ratio;
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text(out_path, text);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multivariate mean-reverting rate model toolkit: simulate, "
               "fit, replicate and forecast"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string out_path;
  std::string in_path;
  std::string data_path;
  long long noise_n = 100000;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "JSON config file")
        ->required();
    sub->add_option("--seed", opts.seed, "master seed override");
    sub->add_option("--workers", opts.workers,
                    "worker threads (default: VASIFIT_WORKERS or config)");
    sub->add_option("--replications", opts.replications,
                    "replication count override");
  };

  CLI::App* sim = app.add_subcommand("simulate", "simulate one path to CSV");
  add_common(sim);
  sim->add_option("--out", out_path, "output path CSV")->required();

  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a path CSV");
  add_common(fit_cmd);
  fit_cmd->add_option("--in", in_path, "input path CSV")->required();
  fit_cmd->add_option("--out", out_path, "output fit JSON")->required();

  CLI::App* mc = app.add_subcommand("mc", "Monte Carlo replication study");
  add_common(mc);
  mc->add_option("--out", out_path, "output directory")->required();

  CLI::App* predict =
      app.add_subcommand("predict", "fit rate data and forecast one step");
  add_common(predict);
  predict->add_option("--data", data_path, "input rate CSV")->required();
  predict->add_option("--out", out_path, "output prediction CSV")->required();

  CLI::App* noise =
      app.add_subcommand("noise-check", "noise generator diagnostics");
  add_common(noise);
  noise->add_option("--out", out_path, "output JSON (default: stdout)");
  noise->add_option("--n", noise_n, "sample size for the diagnostics");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(opts, out_path);
    if (fit_cmd->parsed()) return cmd_fit(opts, in_path, out_path);
    if (mc->parsed()) return cmd_mc(opts, out_path);
    if (predict->parsed()) return cmd_predict(opts, data_path, out_path);
    if (noise->parsed()) return cmd_noise_check(opts, out_path, noise_n);
  } catch (const vasifit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
