#include <doctest.h>

#include <string>

#include "vasifit/config.hpp"

using namespace vasifit;

TEST_CASE("empty config resolves to documented defaults") {
  const RunConfig cfg = parse_run_config("{}");
  CHECK(cfg.noise.kind == NoiseKind::brownian);
  CHECK(cfg.noise.d == 1);
  CHECK(cfg.estimation.t_upper == 5.0);
  CHECK(cfg.estimation.lag_step == 0.0);
  CHECK(cfg.n_steps == 10000);
  CHECK(cfg.h == 0.4);
  CHECK(cfg.seed == 1);
  CHECK(!cfg.r0.has_value());
  CHECK(cfg.replications == 100);
  CHECK(cfg.workers == 1);
  CHECK(cfg.date_column == "date");
  CHECK(cfg.holdout_fraction == 0.2);
  CHECK(cfg.min_rows == 10);
  CHECK((cfg.model.theta - Matrix::Identity(1, 1)).norm() == 0.0);
}

TEST_CASE("full config parses every block") {
  const std::string text = R"({
    "noise": {"kind": "fbm", "d": 2, "hurst": 0.35},
    "model": {
      "theta": [[0.5, 0.1], [0.1, 0.3]],
      "b": [1.0, 3.0],
      "sigma_diag": [1.0, 2.0]
    },
    "estimation": {"t_upper": 4.8, "lag_step": 0.4,
                   "qv_window": "unit_interval"},
    "simulation": {"n_steps": 5000, "h": 0.4, "seed": 99, "r0": [0.5, 0.5]},
    "mc": {"replications": 25, "workers": 4},
    "data": {"date_column": "day", "value_columns": ["gb3m", "gb6m"],
             "h": 0.0833, "holdout_fraction": 0.25, "min_rows": 12}
  })";
  const RunConfig cfg = parse_run_config(text);
  CHECK(cfg.noise.kind == NoiseKind::fbm);
  CHECK(cfg.noise.hurst == 0.35);
  CHECK(cfg.model.theta(0, 1) == 0.1);
  CHECK(cfg.model.sigma(1, 1) == 2.0);
  CHECK(cfg.estimation.qv_window == QvWindow::unit_interval);
  CHECK(cfg.seed == 99);
  REQUIRE(cfg.r0.has_value());
  CHECK((*cfg.r0)[0] == 0.5);
  CHECK(cfg.value_columns.size() == 2);
  CHECK(cfg.min_rows == 12);

  const McConfig mc = cfg.to_mc_config();
  CHECK(mc.replications == 25);
  CHECK(mc.workers == 4);
  CHECK(mc.master_seed == 99);
  CHECK(mc.r0.size() == 2);
}

TEST_CASE("unknown keys are rejected with their path") {
  try {
    parse_run_config(R"({"noise": {"kind": "brownian", "dd": 2}})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("noise.dd") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_run_config(R"({"typo": {}})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"mc": {"threads": 2}})"), ConfigError);
}

TEST_CASE("invalid values are rejected") {
  CHECK_THROWS_AS(parse_run_config("not json"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[1,2]"), ConfigError);
  CHECK_THROWS_AS(
      parse_run_config(R"({"noise": {"kind": "fbm", "hurst": 1.5}})"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_run_config(R"({"noise": {"kind": "white"}})"), ConfigError);
  CHECK_THROWS_AS(
      parse_run_config(R"({"simulation": {"h": -0.1}})"), ConfigError);
  CHECK_THROWS_AS(
      parse_run_config(R"({"mc": {"replications": 0}})"), ConfigError);
  CHECK_THROWS_AS(
      parse_run_config(R"({"data": {"holdout_fraction": 1.5}})"),
      ConfigError);
  // Dimension mismatches across blocks.
  CHECK_THROWS_AS(
      parse_run_config(
          R"({"noise": {"d": 2}, "model": {"b": [1.0, 2.0, 3.0]}})"),
      DimensionError);
  CHECK_THROWS_AS(
      parse_run_config(
          R"({"noise": {"d": 2}, "simulation": {"r0": [1.0]}})"),
      ConfigError);
  // Non-symmetric theta fails model validation.
  CHECK_THROWS_AS(
      parse_run_config(
          R"({"noise": {"d": 2},
              "model": {"theta": [[0.5, 0.2], [0.0, 0.3]]}})"),
      DomainError);
}

TEST_CASE("config round-trips through its JSON dump") {
  const std::string text = R"({
    "noise": {"kind": "compound_poisson", "d": 1,
              "jump_rate": 2.0, "jump_std": 0.3},
    "estimation": {"t_upper": 3.0},
    "simulation": {"n_steps": 1234, "seed": 5}
  })";
  const RunConfig cfg = parse_run_config(text);
  const RunConfig back = parse_run_config(run_config_to_json(cfg));
  CHECK(back.noise.kind == NoiseKind::compound_poisson);
  CHECK(back.noise.jump_rate == cfg.noise.jump_rate);
  CHECK(back.estimation.t_upper == 3.0);
  CHECK(back.n_steps == 1234);
  CHECK(back.seed == 5);
  CHECK(run_config_to_json(back) == run_config_to_json(cfg));
}
