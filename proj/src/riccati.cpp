#include "vasifit/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

namespace vasifit {

CareProblem::CareProblem(Matrix b, Matrix c, Matrix d, double tolerance)
    : B(std::move(b)), C(std::move(c)), D(std::move(d)), tol(tolerance) {
  const Eigen::Index n = B.rows();
  if (B.cols() != n || C.rows() != n || C.cols() != n || D.rows() != n ||
      D.cols() != n) {
    throw DimensionError("CARE matrices must be square with equal dimension");
  }
  if (!B.allFinite() || !C.allFinite() || !D.allFinite()) {
    throw DomainError("CARE matrices must be finite");
  }
  if (tol <= 0.0) throw ConfigError("CARE tolerance must be positive");
  B = 0.5 * (B - B.transpose());
  C = symmetrized(C);
  D = symmetrized(D);
  if (sym_eig(C).eigenvalues.minCoeff() < -1e-8 * std::max(1.0, C.norm())) {
    throw DomainError("CARE matrix C must be positive semidefinite");
  }
}

double care_residual_norm(const Matrix& B, const Matrix& C, const Matrix& D,
                          const Matrix& theta) {
  return (B.transpose() * theta + theta * B - theta * C * theta + D).norm();
}

double care_residual_scale(const Matrix& B, const Matrix& C, const Matrix& D,
                           const Matrix& theta) {
  const double tn = theta.norm();
  return D.norm() + B.norm() * tn + C.norm() * tn * tn;
}

Matrix care_closed_form_B0(const Matrix& C, const Matrix& D) {
  if (!is_spd(C, 0.0)) {
    throw DomainError("care_closed_form_B0: C must be positive definite");
  }
  const Matrix c_half = sym_sqrt_pd(C, 0.0).sqrt;
  const Matrix inner = symmetrized(c_half * symmetrized(D) * c_half);
  const Matrix inner_half = sym_sqrt_pd(inner, 0.0).sqrt;
  // Theta = C^{-1/2} inner^{1/2} C^{-1/2}, via two solves against C^{1/2}.
  Eigen::LLT<Matrix> llt(c_half);
  const Matrix tmp = llt.solve(inner_half);
  const Matrix theta = llt.solve(tmp.transpose()).transpose();
  return symmetrized(theta);
}

namespace {

// Solve A^T X + X A = Rhs by the Kronecker form; dimensions here are tiny.
Matrix solve_lyapunov(const Matrix& A, const Matrix& rhs) {
  const Eigen::Index n = A.rows();
  Matrix k = Matrix::Zero(n * n, n * n);
  const Matrix at = A.transpose();
  // vec(A^T X + X A) = (kron(I, A^T) + kron(A^T, I)) vec(X), column-major.
  for (Eigen::Index j = 0; j < n; ++j) {
    k.block(j * n, j * n, n, n) += at;
  }
  for (Eigen::Index bj = 0; bj < n; ++bj) {
    for (Eigen::Index bi = 0; bi < n; ++bi) {
      const double coeff = at(bj, bi);
      for (Eigen::Index r = 0; r < n; ++r) k(bj * n + r, bi * n + r) += coeff;
    }
  }
  Vector vec_rhs(n * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    vec_rhs.segment(j * n, n) = rhs.col(j);
  }
  Eigen::FullPivLU<Matrix> lu(k);
  if (!lu.isInvertible()) {
    throw SingularityError("CARE Newton step: Lyapunov operator is singular");
  }
  const Vector vec_x = lu.solve(vec_rhs);
  Matrix x(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    x.col(j) = vec_x.segment(j * n, n);
  }
  return x;
}

// Newton refinement of the CARE residual; returns the iteration count.
int newton_refine(const CareProblem& p, Matrix& theta) {
  int iters = 0;
  double res = care_residual_norm(p.B, p.C, p.D, theta);
  for (; iters < 50; ++iters) {
    const double scale = care_residual_scale(p.B, p.C, p.D, theta);
    if (res <= p.tol * scale) break;
    const Matrix residual =
        p.B.transpose() * theta + theta * p.B - theta * p.C * theta + p.D;
    const Matrix a = p.B - p.C * theta;
    Matrix delta = solve_lyapunov(a, -residual);
    delta = symmetrized(delta);
    double step = 1.0;
    Matrix candidate = theta + delta;
    double cand_res = care_residual_norm(p.B, p.C, p.D, candidate);
    // Halve the step while the residual increases.
    int halvings = 0;
    while (cand_res > res && halvings < 30) {
      step *= 0.5;
      candidate = theta + step * delta;
      cand_res = care_residual_norm(p.B, p.C, p.D, candidate);
      ++halvings;
    }
    if (cand_res >= res && halvings >= 30) break;  // stagnated
    theta = symmetrized(candidate);
    res = cand_res;
  }
  return iters;
}

}  // namespace

CareSolution care_solve(const CareProblem& p) {
  const int n = p.dim();
  const double d_scale = std::max(1.0, p.D.norm());
  if (p.C.norm() <= p.tol * d_scale) {
    throw DomainError(
        "CARE is degenerate: C is numerically zero, Theta is not "
        "identifiable from this time instance");
  }

  CareSolution sol;

  if (p.B.norm() <= p.tol * p.C.norm()) {
    try {
      sol.theta = care_closed_form_B0(p.C, p.D);
    } catch (const DomainError& e) {
      throw NoPdSolutionError(std::string("CARE closed form: ") + e.what());
    }
    newton_refine(p, sol.theta);
    sol.branch = "closed_form";
  } else {
    // Stable invariant subspace of the Hamiltonian.
    Matrix ham(2 * n, 2 * n);
    ham << p.B, -p.C, -p.D, -p.B.transpose();
    Eigen::EigenSolver<Matrix> es(ham);
    if (es.info() != Eigen::Success) {
      throw Error("CARE: Hamiltonian eigendecomposition failed");
    }
    std::vector<Eigen::Index> stable;
    for (Eigen::Index i = 0; i < 2 * n; ++i) {
      if (es.eigenvalues()[i].real() < 0.0) stable.push_back(i);
    }
    if (static_cast<int>(stable.size()) != n) {
      throw NoPdSolutionError(
          "CARE: stable Hamiltonian subspace has dimension " +
          std::to_string(stable.size()) + ", expected " + std::to_string(n));
    }
    Eigen::MatrixXcd uc(2 * n, n);
    for (int j = 0; j < n; ++j) uc.col(j) = es.eigenvectors().col(stable[j]);
    // Real orthonormal basis of the (conjugation-closed) stable subspace.
    Matrix span(2 * n, 2 * n);
    span << uc.real(), uc.imag();
    Eigen::ColPivHouseholderQR<Matrix> qr(span);
    qr.setThreshold(1e-12);
    if (qr.rank() < n) {
      throw NoPdSolutionError("CARE: stable subspace basis is rank deficient");
    }
    const Matrix q = qr.householderQ() * Matrix::Identity(2 * n, n);
    const Matrix u1 = q.topRows(n);
    const Matrix u2 = q.bottomRows(n);
    Eigen::FullPivLU<Matrix> lu(u1);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) {
      throw NoPdSolutionError(
          "CARE: U11 is singular, the stabilizing solution does not exist");
    }
    sol.theta = symmetrized(u2 * lu.inverse());
    const int iters = newton_refine(p, sol.theta);
    sol.branch = iters > 0 ? "schur+newton" : "schur";
  }

  sol.residual = care_residual_norm(p.B, p.C, p.D, sol.theta);
  const double scale = care_residual_scale(p.B, p.C, p.D, sol.theta);
  if (sol.residual > p.tol * scale) {
    throw NoPdSolutionError(
        "CARE: residual " + std::to_string(sol.residual) +
        " did not reach tolerance " + std::to_string(p.tol * scale));
  }
  if (!is_spd(sol.theta, 0.0)) {
    throw NoPdSolutionError(
        "CARE: converged solution is not positive definite");
  }
  return sol;
}

}  // namespace vasifit
