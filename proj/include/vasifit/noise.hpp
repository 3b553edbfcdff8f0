#pragma once

#include <cstdint>
#include <complex>
#include <vector>

#include "vasifit/matcore.hpp"

namespace vasifit {

enum class NoiseKind { brownian, fbm, compound_poisson };

const char* to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

// Descriptor of a stationary-increment noise family with independent
// components and known covariance function V(t) = Cov(X_t).
struct NoiseSpec {
  NoiseKind kind = NoiseKind::brownian;
  int d = 1;
  double hurst = 0.5;      // fbm only
  double jump_rate = 1.0;  // compound_poisson only
  double jump_std = 1.0;   // compound_poisson only

  void validate() const;
};

// Increments of X on a uniform grid of step h; column k holds
// X_{t_{k+1}} - X_{t_k}. X_0 = 0 is implied.
struct IncrementArray {
  double h = 1.0;
  Matrix values;  // d x N

  int d() const { return static_cast<int>(values.rows()); }
  Eigen::Index n() const { return values.cols(); }
};

// Exact covariance of X_t. Diagonal because components are independent.
Matrix cov_V(const NoiseSpec& spec, double t);

// Draw N increments at step h. Deterministic for fixed inputs; component
// i of replication `rep` consumes the substream (seed, rep, i).
// fBm uses exact circulant embedding with a dense Cholesky fallback
// (capped at N <= 2^15) when the embedding is not nonnegative.
IncrementArray sample_increments(const NoiseSpec& spec, Eigen::Index N,
                                 double h, std::uint64_t seed,
                                 std::uint64_t rep = 0);

// Diagnostic V(1/N)^{-1} (1/N) sum dX dX^T over one sampled noise path;
// converges to the identity as N grows.
Matrix quadratic_variation_ratio(const NoiseSpec& spec, Eigen::Index N,
                                 std::uint64_t seed);

// Autocovariance of unit-step fractional Gaussian noise at lag k.
double fgn_autocov(double hurst, std::int64_t k);

namespace detail {
// In-place iterative radix-2 FFT; size must be a power of two.
void fft_pow2(std::vector<std::complex<double>>& data, bool inverse);
}  // namespace detail

}  // namespace vasifit
