// Acceptance checks for the toolkit: analytic Riccati oracles, estimator
// bias and consistency on simulated data, noise generator exactness,
// structural identities, prediction sanity and CLI determinism. Each
// criterion prints exactly one PASS/FAIL line; the exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <sys/wait.h>

#include "vasifit/config.hpp"
#include "vasifit/rng.hpp"

using namespace vasifit;

namespace {

int g_failures = 0;

void report(int number, const std::string& what, bool ok,
            const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << " " << number << ": " << what;
  if (!detail.empty()) std::cout << " [" << detail << "]";
  std::cout << std::endl;
  if (!ok) ++g_failures;
}

void run_criterion(int number, const std::string& what,
                   const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  report(number, what, ok, detail);
}

int mc_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return std::max(1, std::min(8, static_cast<int>(hw)));
}

ModelParams diagonal_params() {
  ModelParams p;
  p.theta = Matrix::Zero(2, 2);
  p.theta(0, 0) = 0.5;
  p.theta(1, 1) = 0.3;
  p.b = Vector::Zero(2);
  p.sigma = Matrix::Identity(2, 2);
  return p;
}

ModelParams coupled_params() {
  ModelParams p;
  p.theta = Matrix(2, 2);
  p.theta << 0.5, 0.1, 0.1, 0.3;
  p.b = Vector(2);
  p.b << 1.0, 3.0;
  p.sigma = Matrix::Zero(2, 2);
  p.sigma(0, 0) = 1.0;
  p.sigma(1, 1) = 2.0;
  return p;
}

// Closed-form coefficients of the scalar stationary problem with unit
// sigma: C = t/theta^2 - (1-e^{-theta t})/theta^3, D = t - (1-e^{-theta t})/theta,
// so that theta^2 C = D.
double scalar_C(double theta, double t) {
  const double decay = 1.0 - std::exp(-theta * t);
  return t / (theta * theta) - decay / (theta * theta * theta);
}

double scalar_D(double theta, double t) {
  return t - (1.0 - std::exp(-theta * t)) / theta;
}

Matrix random_spd(int n, Rng& rng, double lo, double hi) {
  Matrix base(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) base(i, j) = rng.normal();
  }
  const SymEig eig = sym_eig(symmetrized(base));
  Vector vals(n);
  for (int i = 0; i < n; ++i) vals[i] = lo + (hi - lo) * rng.uniform();
  return symmetrized(Matrix(eig.eigenvectors * vals.asDiagonal() *
                            eig.eigenvectors.transpose()));
}

Matrix random_antisymmetric(int n, Rng& rng, double scale) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = scale * rng.normal();
  }
  return 0.5 * (m - m.transpose());
}

McConfig diagonal_study(double hurst, std::uint64_t master_seed) {
  McConfig mc;
  mc.params = diagonal_params();
  mc.spec = hurst == 0.5 ? NoiseSpec{NoiseKind::brownian, 2}
                         : NoiseSpec{NoiseKind::fbm, 2, hurst};
  mc.replications = 100;
  mc.n_steps = 10000;
  mc.h = 0.4;
  mc.cfg.t_upper = 5.0;
  mc.master_seed = master_seed;
  mc.workers = mc_workers();
  return mc;
}

double median(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  return n % 2 == 1 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

RateSeries series_from_path(const PathGrid& path) {
  RateSeries s;
  s.h = path.h;
  s.values = path.values;
  char buf[16];
  for (Eigen::Index k = 0; k < path.values.cols(); ++k) {
    std::snprintf(buf, sizeof(buf), "d%08lld", static_cast<long long>(k));
    s.dates.emplace_back(buf);
  }
  for (int i = 1; i <= path.d(); ++i) {
    s.labels.push_back("r" + std::to_string(i));
  }
  return s;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(VASIFIT_BIN) + " " + args +
                          " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) throw Error("std::system failed");
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// ---- criteria ----

bool criterion1(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  const CareSolution scalar =
      care_solve({Matrix::Zero(1, 1), 12.65668 * Matrix::Identity(1, 1),
                  3.16417 * Matrix::Identity(1, 1)});
  if (std::abs(scalar.theta(0, 0) - 0.5) > 1e-5) {
    detail = "scalar root " + std::to_string(scalar.theta(0, 0));
    return false;
  }
  Matrix c = Matrix::Zero(2, 2), d = Matrix::Zero(2, 2);
  c(0, 0) = scalar_C(0.5, 5.0);
  c(1, 1) = scalar_C(0.3, 5.0);
  d(0, 0) = scalar_D(0.5, 5.0);
  d(1, 1) = scalar_D(0.3, 5.0);
  const CareSolution diag = care_solve({Matrix::Zero(2, 2), c, d});
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 0.5;
  expected(1, 1) = 0.3;
  const double err = (diag.theta - expected).cwiseAbs().maxCoeff();
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  detail = "max error " + std::to_string(err) + ", " +
           std::to_string(secs) + " s";
  return err <= 1e-5 && secs < 1.0;
}

bool criterion2(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(271828);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 4;  // dimensions 2..5
    const Matrix theta_true = random_spd(n, rng, 0.2, 3.0);
    const Matrix b = random_antisymmetric(n, rng, 0.5);
    const Matrix c = random_spd(n, rng, 0.3, 2.0);
    const Matrix d = symmetrized(
        Matrix(theta_true * c * theta_true - b.transpose() * theta_true -
               theta_true * b));
    const CareProblem p(b, c, d);
    const CareSolution sol = care_solve(p);
    worst = std::max(worst,
                     (sol.theta - theta_true).cwiseAbs().maxCoeff());
    if (sol.residual >
        p.tol * care_residual_scale(p.B, p.C, p.D, sol.theta)) {
      detail = "residual contract violated on trial " + std::to_string(trial);
      return false;
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  detail = "worst entrywise error " + std::to_string(worst) + ", " +
           std::to_string(secs) + " s";
  return worst <= 1e-7 && secs < 10.0;
}

bool check_bias(const McReport& report, std::string& detail,
                const std::string& tag) {
  for (const ComponentSummary& s : report.theta_errors) {
    if (std::abs(s.mean) > 0.05) {
      detail = tag + " " + s.name + " mean " + std::to_string(s.mean);
      return false;
    }
    if (std::abs(s.q50) > 0.03) {
      detail = tag + " " + s.name + " median " + std::to_string(s.q50);
      return false;
    }
  }
  return true;
}

bool criterion3(const McReport& rough, const McReport& brownian,
                std::string& detail) {
  if (!check_bias(rough, detail, "H=0.35")) return false;
  if (!check_bias(brownian, detail, "H=0.5")) return false;
  detail = "H=0.35 successes " + std::to_string(rough.successes) +
           ", H=0.5 successes " + std::to_string(brownian.successes);
  return true;
}

bool criterion4(const McReport& rough, const McReport& smooth,
                std::string& detail) {
  // The sigma degradation at high H is bias-dominated: the error
  // distribution moves away from zero faster than it widens. Compare the
  // RMS error about the truth, which captures both.
  for (int i = 0; i < 2; ++i) {
    const ComponentSummary& r =
        rough.sigma_errors[static_cast<std::size_t>(i)];
    const ComponentSummary& s =
        smooth.sigma_errors[static_cast<std::size_t>(i)];
    const double rms_rough = std::hypot(r.mean, r.stddev);
    const double rms_smooth = std::hypot(s.mean, s.stddev);
    if (!(rms_smooth > rms_rough)) {
      detail = "sigma_" + std::to_string(i + 1) + " rms error " +
               std::to_string(rms_smooth) + " !> " +
               std::to_string(rms_rough);
      return false;
    }
  }
  // Diagonal theta components sit at indices 0 and 3 of the 2x2 table.
  for (std::size_t idx : {std::size_t{0}, std::size_t{3}}) {
    const double m_rough = std::abs(rough.theta_errors[idx].q50);
    const double m_smooth = std::abs(smooth.theta_errors[idx].q50);
    if (!(m_smooth > m_rough)) {
      detail = rough.theta_errors[idx].name + " |median| " +
               std::to_string(m_smooth) + " !> " + std::to_string(m_rough);
      return false;
    }
  }
  detail = "H=0.8 degrades every tracked component";
  return true;
}

struct TrendErrors {
  double b = 0.0;
  double gamma = 0.0;
  double sigma_sq = 0.0;
  double theta = 0.0;
};

TrendErrors trend_errors(const ModelParams& p, Eigen::Index n, double h,
                         std::uint64_t seed) {
  const NoiseSpec spec{NoiseKind::brownian, 2};
  const IncrementArray inc = sample_increments(spec, n, h, seed);
  const PathGrid path = simulate_path(p, inc, p.b);
  EstimationConfig cfg;
  cfg.t_upper = 5.0;
  const FitResult fitted = fit(path, spec, cfg);
  const LagCovariance gamma = estimate_gamma(path, cfg);

  TrendErrors e;
  e.b = (fitted.b_hat - p.b).cwiseAbs().maxCoeff();
  for (std::size_t j = 0; j < gamma.values.size(); ++j) {
    const double s = static_cast<double>(j) * gamma.lag_step;
    Matrix truth = Matrix::Zero(2, 2);
    for (int i = 0; i < 2; ++i) {
      const double th = p.theta(i, i);
      truth(i, i) = std::exp(-th * s) / (2.0 * th);
    }
    e.gamma = std::max(
        e.gamma, (gamma.values[j] - truth).cwiseAbs().maxCoeff());
  }
  e.sigma_sq =
      (fitted.sigma_sq_hat - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff();
  e.theta = (fitted.theta_hat - p.theta).cwiseAbs().maxCoeff();
  return e;
}

bool criterion5(std::string& detail) {
  const ModelParams p = diagonal_params();
  std::vector<double> b_s, g_s, s_s, t_s, b_l, g_l, s_l, t_l;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const TrendErrors small = trend_errors(p, 1000, 0.5, seed);
    const TrendErrors large = trend_errors(p, 10000, 0.4, seed);
    b_s.push_back(small.b);
    g_s.push_back(small.gamma);
    s_s.push_back(small.sigma_sq);
    t_s.push_back(small.theta);
    b_l.push_back(large.b);
    g_l.push_back(large.gamma);
    s_l.push_back(large.sigma_sq);
    t_l.push_back(large.theta);
  }
  const double bm_s = median(b_s), bm_l = median(b_l);
  const double gm_s = median(g_s), gm_l = median(g_l);
  const double sm_s = median(s_s), sm_l = median(s_l);
  const double tm_s = median(t_s), tm_l = median(t_l);
  std::ostringstream ss;
  ss << "medians b " << bm_s << "->" << bm_l << ", gamma " << gm_s << "->"
     << gm_l << ", sigma_sq " << sm_s << "->" << sm_l << ", theta " << tm_s
     << "->" << tm_l;
  detail = ss.str();
  return bm_l < bm_s && gm_l < gm_s && sm_l < sm_s && tm_l < tm_s;
}

bool criterion6(std::string& detail) {
  const ModelParams p = coupled_params();
  const NoiseSpec spec{NoiseKind::brownian, 2};
  EstimationConfig cfg;
  cfg.t_upper = 4.8;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const IncrementArray inc = sample_increments(spec, 2000, 0.4, seed);
    Vector r0(2), u0(2);
    r0 << 2.0, 1.0;
    u0 << -0.3, 0.4;
    if (coupling_residual(p, inc, r0, u0, PropagatorForm::discrete) >
        1e-12) {
      detail = "coupling residual above machine precision, seed " +
               std::to_string(seed);
      return false;
    }

    const PathGrid path = simulate_path(p, inc, p.b);
    const FitResult base = fit(path, spec, cfg);
    PathGrid shifted = path;
    const Vector c = Vector::Constant(2, 0.75);
    shifted.values.colwise() += c;
    const FitResult moved = fit(shifted, spec, cfg);
    if ((moved.theta_hat - base.theta_hat).cwiseAbs().maxCoeff() > 1e-12 ||
        (moved.b_hat - (base.b_hat + c)).cwiseAbs().maxCoeff() > 1e-12 ||
        (moved.sigma_sq_hat - base.sigma_sq_hat).cwiseAbs().maxCoeff() >
            1e-12) {
      detail = "fit is not shift equivariant, seed " + std::to_string(seed);
      return false;
    }
    if ((base.B_hat + base.B_hat.transpose()).norm() != 0.0 ||
        (base.C_hat - base.C_hat.transpose()).norm() != 0.0 ||
        (base.D_hat - base.D_hat.transpose()).norm() != 0.0) {
      detail = "B/C/D structure broken, seed " + std::to_string(seed);
      return false;
    }

    FitResult truth;
    truth.theta_hat = p.theta;
    truth.b_hat = p.b;
    truth.sigma_hat = p.sigma;
    const IncrementArray recovered =
        extract_increments(truth, series_from_path(path));
    const double scale =
        std::max(1.0, inc.values.cwiseAbs().maxCoeff());
    if ((recovered.values - inc.values).cwiseAbs().maxCoeff() >
        1e-12 * scale) {
      detail = "increment inversion above machine precision, seed " +
               std::to_string(seed);
      return false;
    }
  }
  detail = "10 seeds";
  return true;
}

bool criterion7(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index n = 1024;
  const int reps = 5000;
  const double hurst = 0.35;
  const NoiseSpec spec{NoiseKind::fbm, 1, hurst};
  Matrix x(n, reps);
  for (int r = 0; r < reps; ++r) {
    const IncrementArray inc =
        sample_increments(spec, n, 1.0, 314159,
                          static_cast<std::uint64_t>(r));
    double run = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      run += inc.values(0, k);
      x(k, r) = run;
    }
  }
  const Matrix cov = (x * x.transpose()) / static_cast<double>(reps);
  long violations = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = static_cast<double>(i + 1);
    const double vs = std::pow(s, 2.0 * hurst);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double t = static_cast<double>(j + 1);
      const double vt = std::pow(t, 2.0 * hurst);
      const double expected =
          0.5 * (vs + vt - std::pow(std::abs(t - s), 2.0 * hurst));
      const double se =
          std::sqrt((vs * vt + expected * expected) /
                    static_cast<double>(reps));
      if (std::abs(cov(i, j) - expected) > 4.0 * se) ++violations;
    }
  }
  // A 4-standard-error band is still crossed occasionally among the
  // ~10^6 grid entries; a vanishing violation fraction is the pass bar.
  const double fraction =
      static_cast<double>(violations) / static_cast<double>(n * n);
  if (fraction > 1e-3) {
    detail = "covariance violation fraction " + std::to_string(fraction);
    return false;
  }
  double qv_worst = 0.0;
  for (double h : {0.35, 0.5, 0.8}) {
    const Matrix ratio =
        quadratic_variation_ratio({NoiseKind::fbm, 1, h}, 100000, 999);
    qv_worst = std::max(qv_worst, std::abs(ratio(0, 0) - 1.0));
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  std::ostringstream ss;
  ss << "violation fraction " << fraction << ", worst QV deviation "
     << qv_worst << ", " << secs << " s";
  detail = ss.str();
  return qv_worst <= 0.05 && secs < 60.0;
}

bool criterion8(std::string& detail) {
  const ModelParams p = coupled_params();
  const NoiseSpec spec{NoiseKind::brownian, 2};
  EstimationConfig cfg;
  cfg.t_upper = 5.0;
  FitResult truth;
  truth.theta_hat = p.theta;
  truth.b_hat = p.b;
  truth.sigma_hat = p.sigma;
  std::vector<double> ratios;
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const IncrementArray inc = sample_increments(spec, 10000, 0.4, seed);
    const PathGrid path = simulate_path(p, inc, p.b);
    const RateSeries series = series_from_path(path);
    const FitResult fitted = fit(path, spec, cfg);
    const PredictionReport with_fit = predict_one_step(fitted, series, 0.2);
    const PredictionReport with_truth =
        predict_one_step(truth, series, 0.2);
    ratios.push_back(with_fit.rmse.norm() / with_truth.rmse.norm());
  }
  const double med = median(ratios);
  detail = "median RMSE ratio " + std::to_string(med);
  return med <= 1.05;
}

bool criterion9(std::string& detail) {
  namespace fs = std::filesystem;
  const std::string cfg_text = R"({
  "noise": {"kind": "brownian", "d": 2},
  "model": {
    "theta": [[0.5, 0.0], [0.0, 0.3]],
    "b": [1.0, 3.0],
    "sigma_diag": [1.0, 2.0]
  },
  "estimation": {"t_upper": 4.8},
  "simulation": {"n_steps": 2000, "h": 0.4, "seed": 77},
  "mc": {"replications": 8}
})";
  {
    std::ofstream os("acc_cfg.json");
    os << cfg_text;
  }
  if (run_cli("simulate --config acc_cfg.json --out acc_sim_a.csv") != 0 ||
      run_cli("simulate --config acc_cfg.json --out acc_sim_b.csv") != 0) {
    detail = "simulate did not exit 0";
    return false;
  }
  if (slurp("acc_sim_a.csv") != slurp("acc_sim_b.csv")) {
    detail = "simulate output differs between identical runs";
    return false;
  }
  const std::vector<std::string> dirs = {"acc_mc_w1", "acc_mc_w8",
                                         "acc_mc_w8b"};
  const std::vector<std::string> flags = {"--workers 1", "--workers 8",
                                          "--workers 8"};
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    fs::create_directories(dirs[i]);
    if (run_cli("mc --config acc_cfg.json " + flags[i] + " --out " +
                dirs[i]) != 0) {
      detail = "mc did not exit 0 (" + dirs[i] + ")";
      return false;
    }
  }
  for (const std::string file :
       {"report.json", "estimates.csv", "histograms.csv"}) {
    const std::string base = slurp(dirs[0] + "/" + file);
    for (std::size_t i = 1; i < dirs.size(); ++i) {
      if (slurp(dirs[i] + "/" + file) != base) {
        detail = file + " differs for " + dirs[i];
        return false;
      }
    }
  }
  detail = "simulate x2 and mc across workers {1,8} byte-identical";
  return true;
}

}  // namespace

int main() {
  run_criterion(1, "analytic scalar and diagonal Riccati oracles",
                criterion1);
  run_criterion(2, "Riccati round-trip on 200 random instances", criterion2);

  // Criteria 3 and 4 share the replication studies.
  McReport rough, brownian, smooth;
  bool studies_ok = false;
  std::string study_error;
  try {
    rough = run_mc(diagonal_study(0.35, 2024));
    brownian = run_mc(diagonal_study(0.5, 2024));
    smooth = run_mc(diagonal_study(0.8, 2024));
    studies_ok = true;
  } catch (const std::exception& e) {
    study_error = std::string("exception: ") + e.what();
  }
  run_criterion(3, "estimator bias over 100 replications (H=0.35, 0.5)",
                [&](std::string& detail) {
                  if (!studies_ok) {
                    detail = study_error;
                    return false;
                  }
                  return criterion3(rough, brownian, detail);
                });
  run_criterion(4, "error degradation from H=0.35 to H=0.8",
                [&](std::string& detail) {
                  if (!studies_ok) {
                    detail = study_error;
                    return false;
                  }
                  return criterion4(rough, smooth, detail);
                });

  run_criterion(5, "median errors shrink from (T=500, N=1e3) to "
                   "(T=4000, N=1e4)",
                criterion5);
  run_criterion(6, "exact structural identities on every seed", criterion6);
  run_criterion(7, "noise generator covariance and quadratic variation",
                criterion7);
  run_criterion(8, "fitted one-step predictor tracks the true one",
                criterion8);
  run_criterion(9, "CLI determinism across runs and worker counts",
                criterion9);

  if (g_failures == 0) {
    std::cout << "all acceptance criteria passed" << std::endl;
  } else {
    std::cout << g_failures << " acceptance criteria failed" << std::endl;
  }
  return g_failures;
}
