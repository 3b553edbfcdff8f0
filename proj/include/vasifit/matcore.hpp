#pragma once

#include <Eigen/Dense>

#include "vasifit/errors.hpp"

namespace vasifit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Default relative tolerance for matcore postconditions.
inline constexpr double kMatRtol = 1e-10;

// Symmetric eigendecomposition M = Q diag(lambda) Q^T with eigenvalues
// sorted descending and orthonormal columns in Q.
struct SymEig {
  Vector eigenvalues;
  Matrix eigenvectors;
};

// Eigendecomposition of (M + M^T)/2.
SymEig sym_eig(const Matrix& m);

// Matrix exponential e^A by scaling-and-squaring with Pade degree 13.
// Symmetric inputs take the eigendecomposition route, which keeps the
// result symmetric exactly.
Matrix mat_exp(const Matrix& a);

struct SymSqrtResult {
  Matrix sqrt;
  bool clipped = false;  // true if some eigenvalue was raised to clip_eps
};

// Symmetric PSD square root of (M + M^T)/2 with eigenvalues below
// clip_eps raised to clip_eps. Eigenvalues below -tol_neg (default
// 1e-8 * ||M||) signal a genuinely indefinite input and throw.
SymSqrtResult sym_sqrt_pd(const Matrix& m, double clip_eps = 1e-12,
                          double tol_neg = -1.0);

// True iff the smallest eigenvalue of (M + M^T)/2 exceeds tol.
// Non-finite entries yield false, never a throw.
bool is_spd(const Matrix& m, double tol = 0.0);

bool all_finite(const Matrix& m);

inline Matrix symmetrized(const Matrix& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace vasifit
