#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vasifit/experiment.hpp"
#include "vasifit/ratesio.hpp"

namespace vasifit {

// One structured config document shared by all CLI commands. Unknown
// keys are rejected; every field has a documented default.
struct RunConfig {
  ModelParams model;
  NoiseSpec noise;
  EstimationConfig estimation;

  // simulation block
  Eigen::Index n_steps = 10000;
  double h = 0.4;
  std::uint64_t seed = 1;
  std::optional<Vector> r0;  // default: start at b

  // mc block
  int replications = 100;
  int workers = 1;

  // data block (predict command)
  std::string date_column = "date";
  std::vector<std::string> value_columns;
  double data_h = 1.0;
  double holdout_fraction = 0.2;
  int min_rows = 10;

  McConfig to_mc_config() const;
};

// Strict JSON parse; throws ConfigError naming the offending field.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& file);

// Effective config with all defaults resolved, for the run sidecar.
std::string run_config_to_json(const RunConfig& cfg);

}  // namespace vasifit
