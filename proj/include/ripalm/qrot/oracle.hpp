#pragma once

// Dual augmented Lagrangian machinery for the transport problem. The dual
// variable is y = (u; v) in R^{m+n}; the primal variable is vec(X).

#include <memory>

#include "ripalm/core/ripalm.hpp"
#include "ripalm/kernels/kernels.hpp"
#include "ripalm/qrot/instance.hpp"

namespace ripalm::qrot {

/// Element of the generalized Jacobian of the subproblem gradient:
///   H = scale [Diag(Omega 1), Omega; Omega^T, Diag(Omega^T 1)] + ridge I
/// with scale = sigma / (1 + lambda sigma), ridge = tau / sigma and
/// Omega_ij = 1 exactly where xbar_ij + sigma (u_i + v_j - c_ij) > 0.
class QrotJacobian {
 public:
  QrotJacobian(kernels::ActiveSet omega, double scale, double ridge);

  Index m() const { return omega_.m; }
  Index n() const { return omega_.n; }
  Index dim() const { return omega_.m + omega_.n; }
  const kernels::ActiveSet& omega() const { return omega_; }
  double scale() const { return scale_; }
  double ridge() const { return ridge_; }
  const Vector& row_count() const { return row_count_; }
  const Vector& col_count() const { return col_count_; }

  void apply(const Vector& d, Vector& out) const;
  Vector diagonal() const;
  /// Explicit (m+n) x (m+n) matrix.
  Matrix dense() const;

  /// d with |H d + g| <= tol: dense Cholesky on a Schur complement when
  /// m + n <= kDirectSolveMaxDim, diagonally preconditioned CG otherwise.
  Vector solve(const Vector& g, double tol) const;

 private:
  Vector solve_direct(const Vector& rhs) const;

  kernels::ActiveSet omega_;
  double scale_;
  double ridge_;
  Vector row_count_;
  Vector col_count_;
};

/// Builds the Jacobian element at (u, v) = y.
QrotJacobian build_jacobian(const QrotInstance& inst, const Vector& y, const Matrix& xbar,
                            double sigma, double tau);
QrotJacobian build_jacobian(const QrotInstance& inst, const Vector& y, const double* xbar,
                            double sigma, double tau);

/// Psi(y) = -alpha^T u - beta^T v + sum phi(xbar + sigma(u_i + v_j))
///          - |xbar|^2 / (2 sigma) + tau / (2 sigma) |y - ybar|^2.
class QrotSubproblem final : public Subproblem {
 public:
  /// `xbar` points at m*n column-major entries that must outlive the object.
  QrotSubproblem(const QrotInstance& inst, const double* xbar, const Vector& ybar, double sigma,
                 double tau);

  Index dim() const override { return inst_.m() + inst_.n(); }
  double value(const Vector& y) override;
  void gradient(const Vector& y, Vector& g) override;
  Vector newton_direction(const Vector& y, const Vector& g, double tol) override;
  void jacobian_apply(const Vector& y, const Vector& d, Vector& out) override;
  double primal_step_sq(const Vector& y) override;

  const QrotJacobian& jacobian_at(const Vector& y);
  /// Residual |H d + g| of the last newton_direction call.
  double last_direction_residual() const { return last_residual_; }

 private:
  void evaluate(const Vector& y);

  const QrotInstance& inst_;
  const double* xbar_;
  Vector ybar_;
  double sigma_;
  double tau_;
  double xbar_sq_;

  Vector cached_y_;
  double cached_value_ = 0.0;
  Vector cached_grad_;
  double cached_step_sq_ = 0.0;
  Vector row_sum_;
  Vector col_sum_;

  Vector jac_y_;
  std::unique_ptr<QrotJacobian> jac_;
  double last_residual_ = 0.0;
};

/// Problem oracle: A vec(X) = (X 1; X^T 1), b = (alpha; beta),
/// f(X) = lambda/2 |X|^2 + <C, X> + indicator(X >= 0).
class QrotOracle final : public ProblemOracle {
 public:
  explicit QrotOracle(const QrotInstance& inst) : inst_(inst) {
    b_.resize(inst.m() + inst.n());
    b_ << inst.alpha, inst.beta;
  }

  Index dual_dim() const override { return inst_.m() + inst_.n(); }
  Index primal_dim() const override { return inst_.m() * inst_.n(); }
  void apply_A(const Vector& x, Vector& out) const override;
  void apply_At(const Vector& y, Vector& out) const override;
  void prox(const Vector& point, double sigma, Vector& out) const override;
  const Vector& b() const override { return b_; }
  std::unique_ptr<Subproblem> make_subproblem(const Vector& xbar, const Vector& ybar,
                                              double sigma, double tau) const override;
  void prox_step(const Vector& xbar, const Vector& y, double sigma, Vector& out) const override;

  const QrotInstance& instance() const { return inst_; }

 private:
  const QrotInstance& inst_;
  Vector b_;
};

/// Psi and its gradient at y (both from one pass).
double psi_value(const QrotInstance& inst, const Vector& y, const Matrix& xbar,
                 const Vector& ybar, double sigma, double tau);
Vector grad_psi(const QrotInstance& inst, const Vector& y, const Matrix& xbar,
                const Vector& ybar, double sigma, double tau);

}  // namespace ripalm::qrot
