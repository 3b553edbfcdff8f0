#pragma once

#include <map>
#include <string>
#include <vector>

#include "vasifit/noise.hpp"
#include "vasifit/riccati.hpp"
#include "vasifit/simulate.hpp"

namespace vasifit {

// Empirical lag covariance gamma_hat on the uniform grid
// 0, lag_step, ..., M * lag_step.
struct LagCovariance {
  double lag_step = 0.0;
  std::vector<Matrix> values;  // entry j = gamma_hat(j * lag_step)

  double t_upper() const {
    return static_cast<double>(values.size() - 1) * lag_step;
  }
  const Matrix& at_lag(std::size_t j) const { return values.at(j); }
};

enum class QvWindow { all_increments, unit_interval };

struct EstimationConfig {
  double t_upper = 5.0;
  double lag_step = 0.0;  // 0 means "use the path step h"
  QvWindow qv_window = QvWindow::all_increments;
  double clip_eps = 1e-12;
  double care_tol = 1e-9;
};

struct FitResult {
  Matrix theta_hat;
  Vector b_hat;
  Matrix sigma_hat;
  Matrix sigma_sq_hat;
  Matrix B_hat;
  Matrix C_hat;
  Matrix D_hat;
  double care_residual = 0.0;
  std::map<std::string, std::string> diagnostics;
};

// Thrown when the CARE stage of fit() fails; carries the already
// computed estimates (B_hat, C_hat, D_hat, ...) for inspection.
class FitError : public NoPdSolutionError {
 public:
  using NoPdSolutionError::NoPdSolutionError;
  FitResult partial;
};

// Time average (1/T) int_0^T r ds by the trapezoidal rule. When
// effective_points > 0 only the first effective_points grid points are
// used (the common estimation window shared with the lag covariances).
Vector estimate_b(const PathGrid& path, Eigen::Index effective_points = 0);

// Centered lag covariance estimator on the lag grid [0, t_upper]:
// gamma_hat(s) = (1/T) int_0^T (r_{s+v} - b_hat)(r_v - b_hat)^T dv with
// the common window T = duration - t_upper for every lag, and b_hat
// computed on that same window. The centered form makes the estimator
// exactly shift invariant.
LagCovariance estimate_gamma(const PathGrid& path,
                             const EstimationConfig& cfg);

// Quadratic-variation estimator of sigma sigma^T:
// V(h)^{-1} (1/N) sum dr dr^T, symmetrized.
Matrix estimate_sigma_sq(const PathGrid& path, const NoiseSpec& spec,
                         const EstimationConfig& cfg);

struct BcdMatrices {
  Matrix B;  // antisymmetric
  Matrix C;  // symmetric
  Matrix D;  // symmetric
};

// Coefficient matrices at t = t_upper from the lag covariance:
//   B = int_0^t (gamma - gamma^T),
//   C = 2 int_0^t (t - s) sym(gamma(s)) ds,
//   D = sigma V(t) sigma^T - (2 gamma(0) - gamma(t) - gamma(t)^T),
// all by the trapezoidal rule on the lag grid. Negative lags use the
// transpose convention gamma(-s) = gamma(s)^T.
BcdMatrices build_BCD(const LagCovariance& gamma, const Matrix& sigma_sq,
                      const NoiseSpec& spec, const EstimationConfig& cfg);

// Full pipeline: b_hat, gamma_hat, sigma_sq_hat, (B,C,D), CARE solve.
FitResult fit(const PathGrid& path, const NoiseSpec& spec,
              const EstimationConfig& cfg);

// Serialization for the CLI.
std::string fit_result_to_json(const FitResult& fit);
void write_lag_covariance_csv(const LagCovariance& gamma,
                              const std::string& file);

}  // namespace vasifit
