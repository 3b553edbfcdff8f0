#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vasifit/noise.hpp"

namespace vasifit {

// Parameters (Theta, b, sigma) of the mean-reverting model
// dr = Theta (b - r) dt + sigma dX.
struct ModelParams {
  Matrix theta;  // symmetric PD, d x d
  Vector b;      // d
  Matrix sigma;  // diagonal PD, d x d

  int d() const { return static_cast<int>(b.size()); }
  void validate() const;
};

// Uniformly sampled d-dimensional path; column k is r_{t0 + k h}.
struct PathGrid {
  double t0 = 0.0;
  double h = 1.0;
  Matrix values;  // d x (N+1)
  bool stiffness_warning = false;  // h * ||Theta|| >= 2 at simulation time

  int d() const { return static_cast<int>(values.rows()); }
  Eigen::Index steps() const { return values.cols() - 1; }
  double duration() const { return static_cast<double>(steps()) * h; }
};

// Explicit Euler recursion r_{k+1} = r_k + Theta (b - r_k) h + sigma dX_k.
PathGrid simulate_path(const ModelParams& params, const IncrementArray& inc,
                       const Vector& r0);

// Approximate stationary path: run the b = 0 recursion from the origin and
// drop burn_in steps. burn_in must satisfy burn_in * h >= 10 / lambda_min.
PathGrid simulate_stationary_U(const ModelParams& params,
                               const IncrementArray& inc,
                               Eigen::Index burn_in);

// Max-norm residual of the r-U coupling identity over the grid, with r and
// U driven by the same increments. With the discrete propagator
// (I - h Theta)^k the identity is exact; with the continuous propagator
// e^{-Theta t} the residual measures the Euler discretization error.
enum class PropagatorForm { discrete, continuous };
double coupling_residual(const ModelParams& params, const IncrementArray& inc,
                         const Vector& r0, const Vector& u0,
                         PropagatorForm form = PropagatorForm::discrete);

// CSV with header t,r1,...,rd and 17 significant digits per value.
void write_path_csv(const PathGrid& path, std::ostream& os);
void write_path_csv(const PathGrid& path, const std::string& file);
PathGrid read_path_csv(std::istream& is);
PathGrid read_path_csv(const std::string& file);

}  // namespace vasifit
