#include "vasifit/noise.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vasifit/rng.hpp"

namespace vasifit {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr Eigen::Index kCholeskyCap = 1 << 15;
}  // namespace

const char* to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::brownian:
      return "brownian";
    case NoiseKind::fbm:
      return "fbm";
    case NoiseKind::compound_poisson:
      return "compound_poisson";
  }
  return "?";
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "brownian") return NoiseKind::brownian;
  if (name == "fbm") return NoiseKind::fbm;
  if (name == "compound_poisson") return NoiseKind::compound_poisson;
  throw ConfigError("unknown noise kind '" + name + "'");
}

void NoiseSpec::validate() const {
  if (d < 1) throw ConfigError("noise dimension must be positive");
  if (kind == NoiseKind::fbm && (hurst <= 0.0 || hurst >= 1.0)) {
    throw ConfigError("hurst must lie in (0,1), got " + std::to_string(hurst));
  }
  if (kind == NoiseKind::compound_poisson) {
    if (jump_rate <= 0.0) throw ConfigError("jump_rate must be positive");
    if (jump_std <= 0.0) throw ConfigError("jump_std must be positive");
  }
}

Matrix cov_V(const NoiseSpec& spec, double t) {
  spec.validate();
  if (t < 0.0) throw DomainError("cov_V: t must be nonnegative");
  double v = 0.0;
  switch (spec.kind) {
    case NoiseKind::brownian:
      v = t;
      break;
    case NoiseKind::fbm:
      v = std::pow(t, 2.0 * spec.hurst);
      break;
    case NoiseKind::compound_poisson:
      v = spec.jump_rate * spec.jump_std * spec.jump_std * t;
      break;
  }
  return v * Matrix::Identity(spec.d, spec.d);
}

double fgn_autocov(double hurst, std::int64_t k) {
  const double a = 2.0 * hurst;
  const double kk = static_cast<double>(std::llabs(k));
  return 0.5 * (std::pow(kk + 1.0, a) + std::pow(std::abs(kk - 1.0), a) -
                2.0 * std::pow(kk, a));
}

namespace detail {

void fft_pow2(std::vector<std::complex<double>>& data, bool inverse) {
  const std::size_t n = data.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw DomainError("fft_pow2: size must be a power of two");
  }
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = data[i + k];
        const std::complex<double> v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& x : data) x *= scale;
  }
}

}  // namespace detail

namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// One component of unit-step fGn via Davies-Harte circulant embedding.
// Returns false if the embedding has a materially negative eigenvalue.
bool fgn_circulant(double hurst, Eigen::Index N, Rng& rng,
                   Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>>
                       out) {
  const std::size_t m = std::max<std::size_t>(
      next_pow2(2 * static_cast<std::size_t>(N)), 4);
  const std::size_t half = m / 2;
  std::vector<std::complex<double>> row(m);
  for (std::size_t j = 0; j <= half; ++j) {
    row[j] = fgn_autocov(hurst, static_cast<std::int64_t>(j));
  }
  for (std::size_t j = 1; j < half; ++j) row[m - j] = row[j];
  detail::fft_pow2(row, false);

  std::vector<double> lambda(m);
  double maxlam = 0.0, minlam = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    lambda[k] = row[k].real();
    maxlam = std::max(maxlam, lambda[k]);
    minlam = std::min(minlam, lambda[k]);
  }
  if (minlam < -1e-10 * maxlam) return false;
  for (auto& l : lambda) l = std::max(l, 0.0);

  std::vector<std::complex<double>> spectrum(m);
  const double invm = 1.0 / static_cast<double>(m);
  spectrum[0] = std::sqrt(lambda[0] * invm) * rng.normal();
  for (std::size_t k = 1; k < half; ++k) {
    const double amp = std::sqrt(0.5 * lambda[k] * invm);
    const double re = rng.normal();
    const double im = rng.normal();
    spectrum[k] = std::complex<double>(amp * re, amp * im);
    spectrum[m - k] = std::conj(spectrum[k]);
  }
  spectrum[half] = std::sqrt(lambda[half] * invm) * rng.normal();

  detail::fft_pow2(spectrum, false);
  for (Eigen::Index j = 0; j < N; ++j) {
    out[j] = spectrum[static_cast<std::size_t>(j)].real();
  }
  return true;
}

// Dense fallback: Cholesky factor of the Toeplitz fGn covariance applied
// to a Gaussian vector. O(N^2) memory, capped.
void fgn_cholesky(double hurst, Eigen::Index N, Rng& rng,
                  Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> out,
                  bool embedding_failed) {
  if (N > kCholeskyCap) {
    throw SynthesisError(
        "fbm synthesis failed: circulant embedding has negative eigenvalues" +
        std::string(embedding_failed ? "" : " (unexpected)") +
        " and N=" + std::to_string(N) + " exceeds the Cholesky fallback cap " +
        std::to_string(kCholeskyCap));
  }
  Matrix cov(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      cov(i, j) = fgn_autocov(hurst, i - j);
      cov(j, i) = cov(i, j);
    }
  }
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw SynthesisError(
        "fbm synthesis failed: circulant embedding rejected and the dense "
        "covariance is not numerically PD");
  }
  Vector z(N);
  for (Eigen::Index i = 0; i < N; ++i) z[i] = rng.normal();
  out = (llt.matrixL() * z).transpose();
}

}  // namespace

IncrementArray sample_increments(const NoiseSpec& spec, Eigen::Index N,
                                 double h, std::uint64_t seed,
                                 std::uint64_t rep) {
  spec.validate();
  if (N < 1) throw ConfigError("sample_increments: N must be >= 1");
  if (h <= 0.0) throw ConfigError("sample_increments: h must be positive");

  IncrementArray inc;
  inc.h = h;
  inc.values.resize(spec.d, N);

  for (int i = 0; i < spec.d; ++i) {
    Rng rng(substream_seed(seed, rep, static_cast<std::uint64_t>(i)));
    auto row = inc.values.row(i);
    switch (spec.kind) {
      case NoiseKind::brownian: {
        const double s = std::sqrt(h);
        for (Eigen::Index k = 0; k < N; ++k) row[k] = s * rng.normal();
        break;
      }
      case NoiseKind::fbm: {
        if (!fgn_circulant(spec.hurst, N, rng, row)) {
          fgn_cholesky(spec.hurst, N, rng, row, true);
        }
        // Unit-step fGn scales to step h by self-similarity.
        row *= std::pow(h, spec.hurst);
        break;
      }
      case NoiseKind::compound_poisson: {
        const double mean = spec.jump_rate * h;
        for (Eigen::Index k = 0; k < N; ++k) {
          const std::uint64_t jumps = rng.poisson(mean);
          double sum = 0.0;
          for (std::uint64_t j = 0; j < jumps; ++j) {
            sum += spec.jump_std * rng.normal();
          }
          row[k] = sum;
        }
        break;
      }
    }
  }
  return inc;
}

Matrix quadratic_variation_ratio(const NoiseSpec& spec, Eigen::Index N,
                                 std::uint64_t seed) {
  spec.validate();
  if (N < 2) throw ConfigError("quadratic_variation_ratio: N must be >= 2");
  const double h = 1.0 / static_cast<double>(N);
  const Matrix v = cov_V(spec, h);
  if (v.diagonal().minCoeff() <= 0.0) {
    throw SingularityError(
        "quadratic_variation_ratio: V(1/N) is singular for this noise spec");
  }
  const IncrementArray inc = sample_increments(spec, N, h, seed);
  const Matrix qv =
      (inc.values * inc.values.transpose()) / static_cast<double>(N);
  Matrix ratio(spec.d, spec.d);
  for (int i = 0; i < spec.d; ++i) {
    ratio.row(i) = qv.row(i) / v(i, i);
  }
  return ratio;
}

}  // namespace vasifit
