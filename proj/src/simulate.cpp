#include "vasifit/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace vasifit {

void ModelParams::validate() const {
  const int dim = d();
  if (dim < 1) throw ConfigError("model dimension must be positive");
  if (theta.rows() != dim || theta.cols() != dim) {
    throw DimensionError("theta must be " + std::to_string(dim) + "x" +
                         std::to_string(dim));
  }
  if (sigma.rows() != dim || sigma.cols() != dim) {
    throw DimensionError("sigma must be " + std::to_string(dim) + "x" +
                         std::to_string(dim));
  }
  const double scale = std::max(1.0, theta.norm());
  if ((theta - theta.transpose()).norm() > kMatRtol * scale) {
    throw DomainError("theta must be symmetric");
  }
  if (!is_spd(theta)) throw DomainError("theta must be positive definite");
  if (sigma.diagonal().minCoeff() <= 0.0) {
    throw DomainError("sigma must have strictly positive diagonal");
  }
  if ((sigma - Matrix(sigma.diagonal().asDiagonal())).norm() >
      kMatRtol * std::max(1.0, sigma.norm())) {
    throw DomainError("sigma must be diagonal");
  }
}

namespace {

void check_dims(const ModelParams& params, const IncrementArray& inc) {
  params.validate();
  if (inc.d() != params.d()) {
    throw DimensionError("increment dimension " + std::to_string(inc.d()) +
                         " does not match model dimension " +
                         std::to_string(params.d()));
  }
}

}  // namespace

PathGrid simulate_path(const ModelParams& params, const IncrementArray& inc,
                       const Vector& r0) {
  check_dims(params, inc);
  if (r0.size() != params.d()) {
    throw DimensionError("r0 dimension mismatch");
  }
  const double h = inc.h;
  const Eigen::Index n = inc.n();
  PathGrid path;
  path.h = h;
  path.stiffness_warning = h * params.theta.norm() >= 2.0;
  path.values.resize(params.d(), n + 1);
  path.values.col(0) = r0;
  const Vector sigma_diag = params.sigma.diagonal();
  Vector r = r0;
  for (Eigen::Index k = 0; k < n; ++k) {
    r += params.theta * (params.b - r) * h +
         sigma_diag.cwiseProduct(inc.values.col(k));
    path.values.col(k + 1) = r;
  }
  if (!path.values.allFinite()) {
    throw DomainError("simulate_path produced non-finite values");
  }
  return path;
}

PathGrid simulate_stationary_U(const ModelParams& params,
                               const IncrementArray& inc,
                               Eigen::Index burn_in) {
  check_dims(params, inc);
  const double lambda_min = sym_eig(params.theta).eigenvalues.minCoeff();
  const double min_burn = 10.0 / lambda_min / inc.h;
  if (burn_in < 1 || static_cast<double>(burn_in) < min_burn) {
    throw ConfigError(
        "burn_in too small: need burn_in*h >= 10/lambda_min(theta), i.e. "
        "burn_in >= " +
        std::to_string(static_cast<long long>(std::ceil(min_burn))));
  }
  if (burn_in >= inc.n()) {
    throw ConfigError("burn_in must be smaller than the number of increments");
  }
  ModelParams centered = params;
  centered.b = Vector::Zero(params.d());
  const PathGrid full =
      simulate_path(centered, inc, Vector::Zero(params.d()));
  PathGrid out;
  out.t0 = static_cast<double>(burn_in) * inc.h;
  out.h = inc.h;
  out.stiffness_warning = full.stiffness_warning;
  out.values = full.values.rightCols(full.values.cols() - burn_in);
  return out;
}

double coupling_residual(const ModelParams& params, const IncrementArray& inc,
                         const Vector& r0, const Vector& u0,
                         PropagatorForm form) {
  check_dims(params, inc);
  if (r0.size() != params.d() || u0.size() != params.d()) {
    throw DimensionError("initial value dimension mismatch");
  }
  const PathGrid r = simulate_path(params, inc, r0);
  ModelParams centered = params;
  centered.b = Vector::Zero(params.d());
  const PathGrid u = simulate_path(centered, inc, u0);

  const Vector gap = r0 - u0 - params.b;
  const Matrix step_mat =
      form == PropagatorForm::discrete
          ? Matrix(Matrix::Identity(params.d(), params.d()) -
                   inc.h * params.theta)
          : mat_exp(-inc.h * params.theta);
  double max_dev = 0.0;
  Vector propagated = gap;
  for (Eigen::Index k = 0; k <= inc.n(); ++k) {
    if (k > 0) propagated = step_mat * propagated;
    const Vector predicted = propagated + params.b + u.values.col(k);
    max_dev = std::max(max_dev, (r.values.col(k) - predicted).norm());
  }
  return max_dev;
}

void write_path_csv(const PathGrid& path, std::ostream& os) {
  os << "t";
  for (int i = 1; i <= path.d(); ++i) os << ",r" << i;
  os << "\n";
  char buf[40];
  for (Eigen::Index k = 0; k < path.values.cols(); ++k) {
    const double t = path.t0 + static_cast<double>(k) * path.h;
    std::snprintf(buf, sizeof(buf), "%.17g", t);
    os << buf;
    for (int i = 0; i < path.d(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", path.values(i, k));
      os << ',' << buf;
    }
    os << "\n";
  }
}

void write_path_csv(const PathGrid& path, const std::string& file) {
  std::ofstream os(file);
  if (!os) throw IoError("cannot open '" + file + "' for writing");
  write_path_csv(path, os);
  if (!os) throw IoError("write failed for '" + file + "'");
}

PathGrid read_path_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) {
    throw SchemaError("path CSV is empty");
  }
  int d = 0;
  {
    std::stringstream header(line);
    std::string cell;
    if (!std::getline(header, cell, ',') || cell != "t") {
      throw SchemaError("path CSV must start with column 't'");
    }
    while (std::getline(header, cell, ',')) ++d;
    if (d < 1) throw SchemaError("path CSV has no value columns");
  }
  std::vector<double> times;
  std::vector<double> data;  // row-major per grid point
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    if (!std::getline(row, cell, ',')) continue;
    times.push_back(std::stod(cell));
    for (int i = 0; i < d; ++i) {
      if (!std::getline(row, cell, ',')) {
        throw SchemaError("path CSV row has too few columns");
      }
      data.push_back(std::stod(cell));
    }
  }
  if (times.size() < 2) {
    throw InsufficientDataError("path CSV needs at least 2 grid points");
  }
  PathGrid path;
  path.t0 = times.front();
  path.h = times[1] - times[0];
  if (path.h <= 0.0) throw SchemaError("path CSV times must be increasing");
  for (std::size_t k = 2; k < times.size(); ++k) {
    const double step = times[k] - times[k - 1];
    if (std::abs(step - path.h) > 1e-9 * std::max(1.0, std::abs(path.h))) {
      throw SchemaError("path CSV grid is not uniform");
    }
  }
  path.values.resize(d, static_cast<Eigen::Index>(times.size()));
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (int i = 0; i < d; ++i) {
      path.values(i, static_cast<Eigen::Index>(k)) = data[k * d + i];
    }
  }
  return path;
}

PathGrid read_path_csv(const std::string& file) {
  std::ifstream is(file);
  if (!is) throw IoError("cannot open '" + file + "'");
  return read_path_csv(is);
}

}  // namespace vasifit
