#include "vasifit/ratesio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace vasifit {

PathGrid RateSeries::to_path() const {
  PathGrid path;
  path.h = h;
  path.values = values;
  return path;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  try {
    std::size_t used = 0;
    out = std::stod(text, &used);
    while (used < text.size() &&
           (text[used] == ' ' || text[used] == '\r')) {
      ++used;
    }
    return used == text.size() && std::isfinite(out);
  } catch (...) {
    return false;
  }
}

}  // namespace

RateSeries load_csv(std::istream& source, const std::string& date_column,
                    const std::vector<std::string>& value_columns, double h) {
  if (h <= 0.0) throw ConfigError("observation step h must be positive");
  if (value_columns.empty()) {
    throw ConfigError("at least one value column is required");
  }
  std::string line;
  if (!std::getline(source, line)) throw SchemaError("CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);

  auto find_column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    throw SchemaError("CSV is missing column '" + name + "'");
  };
  const int date_idx = find_column(date_column);
  std::vector<int> value_idx;
  for (const auto& name : value_columns) value_idx.push_back(find_column(name));

  const int d = static_cast<int>(value_columns.size());
  std::vector<std::string> dates;
  std::vector<double> data;  // row-major
  int dropped = 0;
  while (std::getline(source, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) <= date_idx) {
      ++dropped;
      continue;
    }
    std::vector<double> row(static_cast<std::size_t>(d));
    bool ok = true;
    for (int i = 0; i < d && ok; ++i) {
      ok = static_cast<int>(cells.size()) > value_idx[static_cast<std::size_t>(i)] &&
           parse_double(cells[static_cast<std::size_t>(
                            value_idx[static_cast<std::size_t>(i)])],
                        row[static_cast<std::size_t>(i)]);
    }
    if (!ok) {
      ++dropped;
      continue;
    }
    const std::string& date = cells[static_cast<std::size_t>(date_idx)];
    if (!dates.empty() && date <= dates.back()) {
      throw SchemaError("CSV dates are not strictly increasing at '" + date +
                        "'");
    }
    dates.push_back(date);
    data.insert(data.end(), row.begin(), row.end());
  }
  if (dates.size() < 2) {
    throw InsufficientDataError("CSV has fewer than 2 usable rows");
  }

  RateSeries series;
  series.labels = value_columns;
  series.dates = std::move(dates);
  series.h = h;
  series.dropped_rows = dropped;
  const auto rows = static_cast<Eigen::Index>(series.dates.size());
  series.values.resize(d, rows);
  for (Eigen::Index k = 0; k < rows; ++k) {
    for (int i = 0; i < d; ++i) {
      series.values(i, k) = data[static_cast<std::size_t>(k * d + i)];
    }
  }
  return series;
}

RateSeries load_csv(const std::string& file, const std::string& date_column,
                    const std::vector<std::string>& value_columns, double h) {
  std::ifstream is(file);
  if (!is) throw IoError("cannot open '" + file + "'");
  return load_csv(is, date_column, value_columns, h);
}

PredictionReport predict_one_step(const FitResult& fit,
                                  const RateSeries& series,
                                  double holdout_fraction) {
  const int d = series.d();
  if (fit.theta_hat.rows() != d || fit.b_hat.size() != d) {
    throw DimensionError("fit dimension does not match the series");
  }
  if (holdout_fraction <= 0.0 || holdout_fraction >= 1.0) {
    throw ConfigError("holdout_fraction must lie in (0,1)");
  }
  const Eigen::Index total = series.values.cols();
  Eigen::Index holdout = static_cast<Eigen::Index>(
      std::llround(static_cast<double>(total) * holdout_fraction));
  holdout = std::max<Eigen::Index>(1, std::min(holdout, total - 1));

  const Matrix propagator = mat_exp(Matrix(-series.h * fit.theta_hat));
  PredictionReport report;
  report.holdout_fraction = holdout_fraction;
  report.actual.resize(d, holdout);
  report.predicted.resize(d, holdout);
  const Eigen::Index first = total - holdout;
  for (Eigen::Index k = 0; k < holdout; ++k) {
    const Vector prev = series.values.col(first + k - 1);
    report.predicted.col(k) = fit.b_hat + propagator * (prev - fit.b_hat);
    report.actual.col(k) = series.values.col(first + k);
    report.dates.push_back(
        series.dates[static_cast<std::size_t>(first + k)]);
  }
  report.rmse.resize(d);
  report.mae.resize(d);
  const Matrix err = report.predicted - report.actual;
  for (int i = 0; i < d; ++i) {
    report.rmse[i] =
        std::sqrt(err.row(i).squaredNorm() / static_cast<double>(holdout));
    report.mae[i] =
        err.row(i).cwiseAbs().sum() / static_cast<double>(holdout);
  }
  return report;
}

IncrementArray extract_increments(const FitResult& fit,
                                  const RateSeries& series) {
  const int d = series.d();
  if (fit.theta_hat.rows() != d || fit.b_hat.size() != d ||
      fit.sigma_hat.rows() != d) {
    throw DimensionError("fit dimension does not match the series");
  }
  const Vector sigma_diag = fit.sigma_hat.diagonal();
  const double off_norm =
      (fit.sigma_hat - Matrix(sigma_diag.asDiagonal())).norm();
  const bool diagonal =
      off_norm <= 1e-12 * std::max(1.0, fit.sigma_hat.norm());
  if (sigma_diag.minCoeff() <= 1e-12) {
    throw SingularityError("sigma_hat is singular, cannot invert increments");
  }

  const double h = series.h;
  const Eigen::Index n = series.values.cols() - 1;
  IncrementArray inc;
  inc.h = h;
  inc.values.resize(d, n);
  Eigen::LLT<Matrix> llt;
  if (!diagonal) llt.compute(fit.sigma_hat);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Vector r = series.values.col(k);
    // Drift written exactly as in the forward Euler step so that the
    // inversion cancels it bitwise on simulated data.
    const Vector drift = fit.theta_hat * (fit.b_hat - r) * h;
    const Vector noise = series.values.col(k + 1) - r - drift;
    inc.values.col(k) = diagonal
                            ? Vector(noise.cwiseQuotient(sigma_diag))
                            : Vector(llt.solve(noise));
  }
  return inc;
}

void write_prediction_csv(const PredictionReport& report,
                          const std::string& file) {
  std::ofstream os(file);
  if (!os) throw IoError("cannot open '" + file + "' for writing");
  const int d = static_cast<int>(report.actual.rows());
  os << "date";
  for (int i = 1; i <= d; ++i) os << ",actual_" << i << ",pred_" << i;
  os << "\n";
  char buf[40];
  for (Eigen::Index k = 0; k < report.actual.cols(); ++k) {
    os << report.dates[static_cast<std::size_t>(k)];
    for (int i = 0; i < d; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", report.actual(i, k));
      os << ',' << buf;
      std::snprintf(buf, sizeof(buf), "%.17g", report.predicted(i, k));
      os << ',' << buf;
    }
    os << "\n";
  }
}

std::string prediction_metrics_json(const PredictionReport& report) {
  nlohmann::json j;
  j["holdout_fraction"] = report.holdout_fraction;
  j["holdout_steps"] = report.actual.cols();
  j["rmse"] = std::vector<double>(report.rmse.data(),
                                  report.rmse.data() + report.rmse.size());
  j["mae"] = std::vector<double>(report.mae.data(),
                                 report.mae.data() + report.mae.size());
  return j.dump(2);
}

}  // namespace vasifit
