#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vasifit/estimate.hpp"

namespace vasifit {

// Multivariate rate series read from CSV; one row per observation date.
struct RateSeries {
  std::vector<std::string> labels;
  std::vector<std::string> dates;  // ISO-8601, strictly increasing
  Matrix values;                   // d x (N+1)
  double h = 1.0;                  // model time per observation row
  int dropped_rows = 0;            // rows removed because of gaps

  int d() const { return static_cast<int>(values.rows()); }
  PathGrid to_path() const;
};

struct PredictionReport {
  std::vector<std::string> dates;  // holdout dates
  Matrix actual;                   // d x holdout steps
  Matrix predicted;
  Vector rmse;  // per component
  Vector mae;
  double holdout_fraction = 0.0;
};

// Parse a rate CSV: one date column, d numeric value columns. Rows with
// empty or non-numeric cells are dropped and counted.
RateSeries load_csv(std::istream& source, const std::string& date_column,
                    const std::vector<std::string>& value_columns, double h);
RateSeries load_csv(const std::string& file, const std::string& date_column,
                    const std::vector<std::string>& value_columns, double h);

// One-step conditional-drift predictions over the trailing holdout:
// r_hat_{k+1} = b_hat + e^{-Theta_hat h} (r_k - b_hat). Prediction k+1
// reads only the observation at k.
PredictionReport predict_one_step(const FitResult& fit,
                                  const RateSeries& series,
                                  double holdout_fraction = 0.2);

// Invert the Euler recursion to recover the driving noise increments:
// dX_k = sigma_hat^{-1} (dr_k - Theta_hat (b_hat - r_k) h).
IncrementArray extract_increments(const FitResult& fit,
                                  const RateSeries& series);

void write_prediction_csv(const PredictionReport& report,
                          const std::string& file);
std::string prediction_metrics_json(const PredictionReport& report);

}  // namespace vasifit
