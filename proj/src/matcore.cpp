#include "vasifit/matcore.hpp"

#include <algorithm>
#include <cmath>

namespace vasifit {

bool all_finite(const Matrix& m) { return m.allFinite(); }

namespace {

void require_square_finite(const Matrix& m, const char* op) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(op) + ": matrix must be square, got " +
                         std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
  if (!m.allFinite()) {
    throw DomainError(std::string(op) + ": matrix has non-finite entries");
  }
}

bool is_symmetric(const Matrix& m, double rtol) {
  const double scale = std::max(1.0, m.norm());
  return (m - m.transpose()).norm() <= rtol * scale;
}

// Pade degree-13 approximant of e^A, Higham's scaling-and-squaring.
Matrix exp_pade13(const Matrix& a) {
  static const double b[] = {64764752532480000.0, 32382376266240000.0,
                             7771770303897600.0,  1187353796428800.0,
                             129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,
                             1323241920.0,        40840800.0,
                             960960.0,            16380.0,
                             182.0,               1.0};
  const Eigen::Index n = a.rows();
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();  // inf-norm
  const double theta13 = 5.371920351148152;
  int squarings = 0;
  Matrix as = a;
  if (norm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
    as /= std::pow(2.0, squarings);
  }
  const Matrix ident = Matrix::Identity(n, n);
  const Matrix a2 = as * as;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a2 * a4;
  const Matrix u =
      as * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 +
            b[5] * a4 + b[3] * a2 + b[1] * ident);
  const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 +
                   b[4] * a4 + b[2] * a2 + b[0] * ident;
  Matrix r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

}  // namespace

SymEig sym_eig(const Matrix& m) {
  require_square_finite(m, "sym_eig");
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
  if (es.info() != Eigen::Success) {
    throw DomainError("sym_eig: eigendecomposition failed to converge");
  }
  // SelfAdjointEigenSolver sorts ascending; flip to descending.
  const Eigen::Index n = m.rows();
  SymEig out;
  out.eigenvalues = es.eigenvalues().reverse();
  out.eigenvectors = es.eigenvectors().rowwise().reverse();
  (void)n;
  return out;
}

Matrix mat_exp(const Matrix& a) {
  require_square_finite(a, "mat_exp");
  if (is_symmetric(a, kMatRtol)) {
    const SymEig eig = sym_eig(a);
    const Vector expv = eig.eigenvalues.array().exp();
    return eig.eigenvectors * expv.asDiagonal() * eig.eigenvectors.transpose();
  }
  return exp_pade13(a);
}

SymSqrtResult sym_sqrt_pd(const Matrix& m, double clip_eps, double tol_neg) {
  require_square_finite(m, "sym_sqrt_pd");
  if (clip_eps < 0.0) {
    throw DomainError("sym_sqrt_pd: clip_eps must be nonnegative");
  }
  if (tol_neg < 0.0) tol_neg = 1e-8 * std::max(1.0, m.norm());
  const SymEig eig = sym_eig(m);
  if (eig.eigenvalues.minCoeff() < -tol_neg) {
    throw DomainError(
        "sym_sqrt_pd: input is not PSD (smallest eigenvalue " +
        std::to_string(eig.eigenvalues.minCoeff()) +
        "); the sigma*sigma^T estimate is unusable");
  }
  SymSqrtResult out;
  Vector clipped = eig.eigenvalues;
  for (Eigen::Index i = 0; i < clipped.size(); ++i) {
    if (clipped[i] < clip_eps) {
      clipped[i] = clip_eps;
      out.clipped = true;
    }
  }
  const Vector roots = clipped.array().sqrt();
  out.sqrt =
      eig.eigenvectors * roots.asDiagonal() * eig.eigenvectors.transpose();
  out.sqrt = symmetrized(out.sqrt);
  return out;
}

bool is_spd(const Matrix& m, double tol) {
  if (m.rows() != m.cols() || m.size() == 0 || !m.allFinite()) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
  if (es.info() != Eigen::Success) return false;
  return es.eigenvalues().minCoeff() > tol;
}

}  // namespace vasifit
