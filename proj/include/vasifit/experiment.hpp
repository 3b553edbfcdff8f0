#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vasifit/estimate.hpp"

namespace vasifit {

// One Monte Carlo replication study: R independent paths, one fit each.
struct McConfig {
  ModelParams params;
  NoiseSpec spec;
  int replications = 100;
  Eigen::Index n_steps = 10000;
  double h = 0.4;
  EstimationConfig cfg;
  std::uint64_t master_seed = 1;
  int workers = 1;
  Vector r0;  // empty means "start at b"

  void validate() const;
};

struct RepEstimate {
  int index = 0;
  bool success = false;
  Matrix theta_hat;
  Vector b_hat;
  Matrix sigma_hat;
  std::string failure_kind;  // empty on success
};

struct Histogram {
  std::vector<double> edges;  // 41 edges for 40 bins
  std::vector<int> counts;
};

// Summary of one scalar error component across successful replications.
struct ComponentSummary {
  std::string name;
  double mean = 0.0;
  double stddev = 0.0;  // sample convention, divisor R-1
  double q01 = 0.0, q05 = 0.0, q50 = 0.0, q95 = 0.0, q99 = 0.0;
  Histogram histogram;
};

struct McReport {
  std::vector<RepEstimate> estimates;
  std::vector<ComponentSummary> theta_errors;  // entries of theta_hat-theta
  std::vector<ComponentSummary> b_errors;
  std::vector<ComponentSummary> sigma_errors;  // diagonal entries
  ComponentSummary theta_frobenius;            // ||theta_hat - theta||_F
  int successes = 0;
  int failures = 0;
  std::map<std::string, int> failure_reasons;
};

// Quantile with the midpoint convention: average of the two order
// statistics adjacent to q*(n-1) when it is fractional.
double quantile_midpoint(std::vector<double> sorted, double q);

// Statistics and histogram bins for the given per-replication estimates.
// Histograms use 40 bins spanning the [0.5%, 99.5%] quantile range.
McReport summarize(std::vector<RepEstimate> estimates,
                   const ModelParams& truth);

// Full study. Deterministic for a fixed master seed and independent of
// the worker count: replication j always uses seed substream (master, j).
McReport run_mc(const McConfig& mc);

std::string mc_report_to_json(const McReport& report, const McConfig& mc);
void write_mc_estimates_csv(const McReport& report, const std::string& file);
void write_mc_histograms_csv(const McReport& report, const std::string& file);

}  // namespace vasifit
