#pragma once

#include "ripalm/numerics/dense.hpp"
#include "ripalm/qrot/instance.hpp"

namespace ripalm::qrot {

/// Relative KKT residuals of (u, v, X), with Z = C + lambda X - u 1^T - 1 v^T:
///   primal = max(|X1 - alpha| / (1 + |alpha|), |X^T 1 - beta| / (1 + |beta|),
///                |min(X, 0)| / (1 + |X|))
///   dual   = |min(Z, 0)| / (1 + |C|)
///   comp   = |<X, Z>| / (1 + |C|)
///   gap    = |pobj - dobj| / (1 + |pobj| + |dobj|)
/// pobj = lambda/2 |X|^2 + <C, X>; dobj = -|max(u + v - C, 0)|^2 / (2 lambda)
/// + alpha^T u + beta^T v (the conjugate term is dropped when lambda = 0;
/// dual infeasibility then shows up in `dual`). All norms Frobenius/Euclidean.
struct QrotResiduals {
  double primal = 0.0;
  double dual = 0.0;
  double comp = 0.0;
  double gap = 0.0;
  double res = 0.0;  // max of the four
  double pobj = 0.0;
  double dobj = 0.0;
};

/// Fused single-pass evaluation used inside the solvers.
QrotResiduals kkt_residuals(const QrotInstance& inst, const Vector& u, const Vector& v,
                            const Matrix& plan);
QrotResiduals kkt_residuals(const QrotInstance& inst, const Vector& u, const Vector& v,
                            const double* plan);

/// Independent recomputation from plain matrix expressions (no shared code
/// with the solver path); used to certify reported solutions.
QrotResiduals certify(const QrotInstance& inst, const Vector& u, const Vector& v,
                      const Matrix& plan);

/// Combines precomputed sums into residuals (shared by the fused kernels).
struct QrotKktInputs {
  const Vector* row_sum = nullptr;
  const Vector* col_sum = nullptr;
  double neg_plan_sq = 0.0;
  double plan_sq = 0.0;
  double neg_z_sq = 0.0;
  double plan_dot_z = 0.0;
  double cost_dot_plan = 0.0;
  double conj_sq = 0.0;
  double dual_linear = 0.0;  // alpha^T u + beta^T v
};
QrotResiduals combine_residuals(const QrotInstance& inst, double cost_norm,
                                const QrotKktInputs& in);

}  // namespace ripalm::qrot
