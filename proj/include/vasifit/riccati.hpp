#pragma once

#include <string>

#include "vasifit/matcore.hpp"

namespace vasifit {

// Continuous-time algebraic Riccati equation
//   B^T Theta + Theta B - Theta C Theta + D = 0
// with antisymmetric B, symmetric PSD C and symmetric D, solved for a
// symmetric positive definite Theta.
struct CareProblem {
  Matrix B;  // antisymmetrized at construction
  Matrix C;  // symmetrized
  Matrix D;  // symmetrized
  double tol = 1e-9;

  CareProblem(Matrix b, Matrix c, Matrix d, double tolerance = 1e-9);
  int dim() const { return static_cast<int>(B.rows()); }
};

struct CareSolution {
  Matrix theta;
  double residual = 0.0;  // Frobenius norm of the CARE residual
  std::string branch;     // "schur", "schur+newton" or "closed_form"
};

// Frobenius norm of B^T Theta + Theta B - Theta C Theta + D.
double care_residual_norm(const Matrix& B, const Matrix& C, const Matrix& D,
                          const Matrix& theta);

// Residual scale used in the acceptance contract:
// ||D|| + ||B|| ||Theta|| + ||C|| ||Theta||^2 (Frobenius norms).
double care_residual_scale(const Matrix& B, const Matrix& C, const Matrix& D,
                           const Matrix& theta);

// Stabilizing-subspace solve of the CARE: stable invariant subspace of the
// Hamiltonian [[B, -C], [-D, -B^T]], symmetrization, then Newton
// refinement on the residual. Throws NoPdSolutionError when no positive
// definite solution is found.
CareSolution care_solve(const CareProblem& p);

// Closed form for B = 0: Theta C Theta = D, i.e.
// Theta = C^{-1/2} (C^{1/2} D C^{1/2})^{1/2} C^{-1/2}.
// Independent of the Schur route; also used as its fallback when B ~ 0.
Matrix care_closed_form_B0(const Matrix& C, const Matrix& D);

}  // namespace vasifit
