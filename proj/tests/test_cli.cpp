#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace {

const std::string kBin = VASIFIT_BIN;

int run(const std::string& args) {
  const int status = std::system((kBin + " " + args + " 2>/dev/null").c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  REQUIRE(is.good());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void put(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  os << text;
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (char c : text) lines += c == '\n';
  return lines;
}

const char* kSmallConfig = R"({
  "noise": {"kind": "brownian", "d": 2},
  "model": {
    "theta": [[0.5, 0.0], [0.0, 0.3]],
    "b": [1.0, 3.0],
    "sigma_diag": [1.0, 2.0]
  },
  "estimation": {"t_upper": 4.8},
  "simulation": {"n_steps": 2000, "h": 0.4, "seed": 11}
})";

}  // namespace

TEST_CASE("simulate writes the path CSV and a config sidecar") {
  put("cli_cfg.json", kSmallConfig);
  REQUIRE(run("simulate --config cli_cfg.json --out cli_path.csv") == 0);
  const std::string csv = slurp("cli_path.csv");
  CHECK(csv.substr(0, csv.find('\n')) == "t,r1,r2");
  CHECK(count_lines(csv) == 2002);  // header + N+1 grid points
  const std::string sidecar = slurp("cli_path.csv.config.json");
  CHECK(sidecar.find("\"seed\": 11") != std::string::npos);
}

TEST_CASE("simulate is reproducible and responds to --seed") {
  put("cli_cfg.json", kSmallConfig);
  REQUIRE(run("simulate --config cli_cfg.json --out cli_a.csv") == 0);
  REQUIRE(run("simulate --config cli_cfg.json --out cli_b.csv") == 0);
  CHECK(slurp("cli_a.csv") == slurp("cli_b.csv"));
  REQUIRE(run("simulate --config cli_cfg.json --seed 12 --out cli_c.csv") ==
          0);
  CHECK(slurp("cli_a.csv") != slurp("cli_c.csv"));
}

TEST_CASE("invalid configs exit with code 2") {
  put("cli_bad.json", R"({"noise": {"kind": "fbm", "hurst": 1.5}})");
  CHECK(run("simulate --config cli_bad.json --out cli_x.csv") == 2);
  put("cli_bad.json", R"({"noise": {"kind": "brownian"}, "oops": 1})");
  CHECK(run("simulate --config cli_bad.json --out cli_x.csv") == 2);
  put("cli_bad.json", "{garbage");
  CHECK(run("fit --config cli_bad.json --in cli_a.csv --out cli_x.json") ==
        2);
}

TEST_CASE("missing input files exit with code 5") {
  put("cli_cfg.json", kSmallConfig);
  CHECK(run("fit --config cli_cfg.json --in no_such.csv --out cli_x.json") ==
        5);
  CHECK(run("simulate --config no_such_cfg.json --out cli_x.csv") == 5);
}

TEST_CASE("fit on a simulated path succeeds end to end") {
  put("cli_cfg.json", kSmallConfig);
  REQUIRE(run("simulate --config cli_cfg.json --out cli_fitin.csv") == 0);
  REQUIRE(run("fit --config cli_cfg.json --in cli_fitin.csv "
              "--out cli_fit.json") == 0);
  const std::string fit = slurp("cli_fit.json");
  CHECK(fit.find("theta_hat") != std::string::npos);
  CHECK(fit.find("care_residual") != std::string::npos);
  CHECK(fit.find("\"care_branch\"") != std::string::npos);
}

TEST_CASE("fit on a degenerate path exits 4 but writes diagnostics") {
  put("cli_cfg.json", kSmallConfig);
  std::ostringstream flat;
  flat << "t,r1,r2\n";
  for (int k = 0; k <= 1000; ++k) {
    flat << 0.4 * k << ",1,3\n";
  }
  put("cli_flat.csv", flat.str());
  CHECK(run("fit --config cli_cfg.json --in cli_flat.csv "
            "--out cli_flatfit.json") == 4);
  const std::string out = slurp("cli_flatfit.json");
  CHECK(out.find("care_error") != std::string::npos);
  CHECK(out.find("B_hat") != std::string::npos);
}

TEST_CASE("noise-check reports near-identity diagnostics") {
  put("cli_cfg.json", kSmallConfig);
  REQUIRE(run("noise-check --config cli_cfg.json --n 20000 "
              "--out cli_noise.json") == 0);
  const std::string out = slurp("cli_noise.json");
  CHECK(out.find("qv_ratio_max_abs_dev_from_identity") != std::string::npos);
  CHECK(out.find("increment_variance_ratio") != std::string::npos);
}

TEST_CASE("predict runs the data pipeline end to end") {
  // Build a synthetic rate CSV from a simulated path.
  put("cli_cfg.json", kSmallConfig);
  REQUIRE(run("simulate --config cli_cfg.json --out cli_rates_raw.csv") == 0);
  const std::string raw = slurp("cli_rates_raw.csv");
  std::ostringstream rates;
  rates << "date,gb3m,gb6m\n";
  std::istringstream lines(raw);
  std::string line;
  std::getline(lines, line);  // drop header
  int day = 0;
  while (std::getline(lines, line)) {
    const std::size_t comma = line.find(',');
    char date[16];
    std::snprintf(date, sizeof(date), "d%06d", day++);
    rates << date << line.substr(comma) << "\n";
  }
  put("cli_rates.csv", rates.str());

  std::string cfg(kSmallConfig);
  cfg.insert(cfg.rfind('}'),
             R"(, "data": {"value_columns": ["gb3m", "gb6m"], "h": 0.4})");
  put("cli_pred_cfg.json", cfg);
  REQUIRE(run("predict --config cli_pred_cfg.json --data cli_rates.csv "
              "--out cli_pred.csv") == 0);
  const std::string pred = slurp("cli_pred.csv");
  CHECK(pred.substr(0, pred.find('\n')) ==
        "date,actual_1,pred_1,actual_2,pred_2");
  const std::string metrics = slurp("cli_pred.csv.metrics.json");
  CHECK(metrics.find("rmse") != std::string::npos);
  CHECK(slurp("cli_pred.csv.fit.json").find("theta_hat") !=
        std::string::npos);

  // Too few usable rows for the configured minimum exits 4.
  put("cli_tiny.csv",
      "date,gb3m,gb6m\nd1,1,1\nd2,1.1,1.2\nd3,1.2,1.1\n");
  CHECK(run("predict --config cli_pred_cfg.json --data cli_tiny.csv "
            "--out cli_pred2.csv") == 4);
}
