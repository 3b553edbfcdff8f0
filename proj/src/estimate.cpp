#include "vasifit/estimate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace vasifit {

namespace {

struct Window {
  Eigen::Index stride;      // lag_step / h
  Eigen::Index num_lags;    // M, lag grid is 0..M
  Eigen::Index last_index;  // K: integration nodes are columns 0..K
  double lag_step;
};

Window resolve_window(const PathGrid& path, const EstimationConfig& cfg) {
  const double h = path.h;
  Window w;
  w.lag_step = cfg.lag_step > 0.0 ? cfg.lag_step : h;
  const double stride_real = w.lag_step / h;
  w.stride = static_cast<Eigen::Index>(std::llround(stride_real));
  if (w.stride < 1 ||
      std::abs(stride_real - static_cast<double>(w.stride)) > 1e-9) {
    throw ConfigError("lag_step must be an integer multiple of the path step");
  }
  // t_upper is snapped down to the nearest lag multiple so a request like
  // t_upper = 5 on an h = 0.4 grid uses the largest representable window
  // (4.8) instead of failing.
  const double lags_real = cfg.t_upper / w.lag_step;
  w.num_lags = static_cast<Eigen::Index>(std::floor(lags_real + 1e-9));
  if (w.num_lags < 1) {
    throw ConfigError("t_upper must be at least one lag_step");
  }
  const Eigen::Index n = path.steps();
  w.last_index = n - w.num_lags * w.stride;
  if (cfg.t_upper >= path.duration() / 2.0 || w.last_index < 1) {
    throw InsufficientDataError(
        "path duration " + std::to_string(path.duration()) +
        " is too short for t_upper " + std::to_string(cfg.t_upper));
  }
  return w;
}

double scalar_cov_V(const NoiseSpec& spec, double t) {
  const Matrix v = cov_V(spec, t);
  return v(0, 0);
}

}  // namespace

Vector estimate_b(const PathGrid& path, Eigen::Index effective_points) {
  const Eigen::Index total = path.values.cols();
  if (total < 2) throw InsufficientDataError("estimate_b needs >= 2 points");
  Eigen::Index pts = effective_points > 0 ? effective_points : total;
  if (pts < 2 || pts > total) {
    throw ConfigError("estimate_b: invalid effective window");
  }
  Vector sum = 0.5 * (path.values.col(0) + path.values.col(pts - 1));
  for (Eigen::Index k = 1; k + 1 < pts; ++k) sum += path.values.col(k);
  return sum / static_cast<double>(pts - 1);
}

LagCovariance estimate_gamma(const PathGrid& path,
                             const EstimationConfig& cfg) {
  const Window w = resolve_window(path, cfg);
  const Eigen::Index k_last = w.last_index;
  const Vector b_hat = estimate_b(path, k_last + 1);
  const Matrix centered =
      path.values.colwise() - b_hat;  // shared by every lag

  LagCovariance out;
  out.lag_step = w.lag_step;
  out.values.reserve(static_cast<std::size_t>(w.num_lags) + 1);
  const double inv_t = 1.0 / (static_cast<double>(k_last) * path.h);
  for (Eigen::Index j = 0; j <= w.num_lags; ++j) {
    const Eigen::Index offset = j * w.stride;
    Matrix acc = 0.5 * (centered.col(offset) * centered.col(0).transpose() +
                        centered.col(offset + k_last) *
                            centered.col(k_last).transpose());
    for (Eigen::Index k = 1; k < k_last; ++k) {
      acc.noalias() +=
          centered.col(offset + k) * centered.col(k).transpose();
    }
    out.values.push_back(acc * path.h * inv_t);
  }
  // gamma_hat(0) estimates a covariance; make its symmetry exact.
  out.values[0] = symmetrized(out.values[0]);
  return out;
}

Matrix estimate_sigma_sq(const PathGrid& path, const NoiseSpec& spec,
                         const EstimationConfig& cfg) {
  if (spec.d != path.d()) {
    throw DimensionError("noise spec dimension does not match the path");
  }
  const Eigen::Index n = path.steps();
  if (n < 1) throw InsufficientDataError("estimate_sigma_sq needs increments");
  Eigen::Index count = n;
  if (cfg.qv_window == QvWindow::unit_interval) {
    count = std::min<Eigen::Index>(
        n, static_cast<Eigen::Index>(std::llround(1.0 / path.h)));
    if (count < 1) {
      throw InsufficientDataError(
          "unit_interval quadratic-variation window holds no increment");
    }
  }
  const double v = scalar_cov_V(spec, path.h);
  if (v <= 0.0 || !std::isfinite(v)) {
    throw SingularityError(
        "V(h) is singular; the quadratic-variation normalization fails "
        "(noise covariance must be invertible at the observation step)");
  }
  Matrix acc = Matrix::Zero(path.d(), path.d());
  for (Eigen::Index k = 0; k < count; ++k) {
    const Vector dr = path.values.col(k + 1) - path.values.col(k);
    acc.noalias() += dr * dr.transpose();
  }
  return symmetrized(acc / (static_cast<double>(count) * v));
}

BcdMatrices build_BCD(const LagCovariance& gamma, const Matrix& sigma_sq,
                      const NoiseSpec& spec, const EstimationConfig& cfg) {
  const std::size_t m = gamma.values.size();
  if (m < 2) throw InsufficientDataError("lag covariance needs >= 2 lags");
  const int d = static_cast<int>(gamma.values[0].rows());
  if (sigma_sq.rows() != d || sigma_sq.cols() != d) {
    throw DimensionError("sigma_sq dimension does not match the lag grid");
  }
  const double ds = gamma.lag_step;
  const double t = gamma.t_upper();

  Matrix b_acc = Matrix::Zero(d, d);
  Matrix c_acc = Matrix::Zero(d, d);
  for (std::size_t j = 0; j < m; ++j) {
    const double weight = (j == 0 || j + 1 == m) ? 0.5 : 1.0;
    const Matrix& g = gamma.values[j];
    const double s = static_cast<double>(j) * ds;
    b_acc += weight * (g - g.transpose());
    c_acc += weight * (t - s) * (g + g.transpose());
  }
  BcdMatrices out;
  out.B = b_acc * ds;
  out.C = symmetrized(Matrix(c_acc * ds));
  const Matrix& g0 = gamma.values.front();
  const Matrix& gt = gamma.values.back();
  const double v = scalar_cov_V(spec, t);
  (void)cfg;
  out.D = symmetrized(
      Matrix(v * sigma_sq - (2.0 * g0 - gt - gt.transpose())));
  // Exact structure by construction.
  out.B = 0.5 * (out.B - out.B.transpose());
  return out;
}

FitResult fit(const PathGrid& path, const NoiseSpec& spec,
              const EstimationConfig& cfg) {
  const Window w = resolve_window(path, cfg);
  FitResult result;
  result.b_hat = estimate_b(path, w.last_index + 1);
  const LagCovariance gamma = estimate_gamma(path, cfg);
  result.sigma_sq_hat = estimate_sigma_sq(path, spec, cfg);
  const SymSqrtResult root = sym_sqrt_pd(result.sigma_sq_hat, cfg.clip_eps);
  result.sigma_hat = root.sqrt;
  const BcdMatrices bcd = build_BCD(gamma, result.sigma_sq_hat, spec, cfg);
  result.B_hat = bcd.B;
  result.C_hat = bcd.C;
  result.D_hat = bcd.D;
  result.diagnostics["sigma_clipped"] = root.clipped ? "true" : "false";
  result.diagnostics["window_points"] = std::to_string(w.last_index + 1);
  result.diagnostics["t_upper"] =
      std::to_string(static_cast<double>(w.num_lags) * w.lag_step);
  result.diagnostics["lag_step"] = std::to_string(w.lag_step);
  result.diagnostics["stiffness_warning"] =
      path.stiffness_warning ? "true" : "false";

  const CareProblem problem(bcd.B, bcd.C, bcd.D, cfg.care_tol);
  CareSolution sol;
  try {
    sol = care_solve(problem);
  } catch (const Error& e) {
    FitError err("fit: CARE solve failed: " + std::string(e.what()));
    err.partial = result;
    err.partial.diagnostics["care_error"] = e.what();
    throw err;
  }
  result.theta_hat = sol.theta;
  result.care_residual = sol.residual;
  result.diagnostics["care_branch"] = sol.branch;
  result.diagnostics["theta_pd_margin"] =
      std::to_string(sym_eig(sol.theta).eigenvalues.minCoeff());
  return result;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> entries;
  entries.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) entries.push_back(m(r, c));
  }
  j["data"] = entries;
  return j;
}

}  // namespace

std::string fit_result_to_json(const FitResult& fit) {
  nlohmann::json j;
  j["theta_hat"] = matrix_to_json(fit.theta_hat);
  j["b_hat"] = std::vector<double>(fit.b_hat.data(),
                                   fit.b_hat.data() + fit.b_hat.size());
  j["sigma_hat"] = matrix_to_json(fit.sigma_hat);
  j["sigma_sq_hat"] = matrix_to_json(fit.sigma_sq_hat);
  j["B_hat"] = matrix_to_json(fit.B_hat);
  j["C_hat"] = matrix_to_json(fit.C_hat);
  j["D_hat"] = matrix_to_json(fit.D_hat);
  j["care_residual"] = fit.care_residual;
  j["diagnostics"] = fit.diagnostics;
  return j.dump(2);
}

void write_lag_covariance_csv(const LagCovariance& gamma,
                              const std::string& file) {
  std::ofstream os(file);
  if (!os) throw IoError("cannot open '" + file + "' for writing");
  const int d = static_cast<int>(gamma.values.at(0).rows());
  os << "lag";
  for (int r = 1; r <= d; ++r) {
    for (int c = 1; c <= d; ++c) os << ",g" << r << c;
  }
  os << "\n";
  char buf[40];
  for (std::size_t j = 0; j < gamma.values.size(); ++j) {
    std::snprintf(buf, sizeof(buf), "%.17g",
                  static_cast<double>(j) * gamma.lag_step);
    os << buf;
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", gamma.values[j](r, c));
        os << ',' << buf;
      }
    }
    os << "\n";
  }
}

}  // namespace vasifit
