#pragma once

#include <functional>
#include <optional>

#include <Eigen/Cholesky>

#include "ripalm/numerics/dense.hpp"

namespace ripalm {

/// Linear operator d -> A d.
using LinearOperator = std::function<void(const Vector& in, Vector& out)>;

/// Systems up to this dimension are factorized; larger ones go through PCG.
inline constexpr Index kDirectSolveMaxDim = 2000;

/// Dense Cholesky factorization of a symmetric positive definite matrix.
///
/// Construction checks symmetry to 1e-12 (relative to the largest entry) and
/// throws NotSpd when a pivot is not strictly positive.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(const Matrix& a);

  Vector solve(const Vector& rhs) const;
  Index dim() const { return llt_.rows(); }

 private:
  Eigen::LLT<Matrix> llt_;
};

/// Solves A d = rhs for SPD A.
Vector cholesky_solve(const Matrix& a, const Vector& rhs);

struct PcgResult {
  Vector x;
  int iterations = 0;
  double residual_norm = 0.0;  // ||rhs - A x|| (recursively updated)
  bool converged = false;
};

/// Preconditioned conjugate gradient for an SPD operator.
///
/// Stops once ||A x - rhs|| <= tol. Returns the last iterate with
/// converged == false when maxit is reached. `precond` applies M^{-1}.
/// Throws Breakdown if <p, A p> <= 0.
PcgResult pcg_solve(const LinearOperator& matvec, const Vector& rhs, double tol, int maxit,
                    const std::optional<LinearOperator>& precond = std::nullopt,
                    const Vector* x0 = nullptr);

/// Jacobi preconditioner from an operator diagonal (entries must be > 0).
LinearOperator diagonal_preconditioner(Vector diag);

/// Probabilistic SPD check: <d, A d> > 0 for `trials` Gaussian vectors.
bool probably_spd(const LinearOperator& matvec, Index dim, int trials = 10,
                  unsigned seed = 12345);

}  // namespace ripalm
