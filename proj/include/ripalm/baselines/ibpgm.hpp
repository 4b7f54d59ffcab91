#pragma once

// Inexact Bregman proximal gradient warm start for the transport problem.
// Each outer step k solves, inexactly, the entropic subproblem
//   min <M_k, X> + mu H(X)  s.t. marginals,   M_k = C + lambda X_k - mu log X_k
// by a single Sinkhorn sweep on the Gibbs kernel Xi = X_k * exp(-(C + lambda X_k) / mu).

#include <functional>

#include "ripalm/numerics/dense.hpp"
#include "ripalm/qrot/instance.hpp"
#include "ripalm/qrot/kkt.hpp"

namespace ripalm::baselines {

struct IbpgmConfig {
  int max_iter = 500;
  double tol = 1e-3;
  double mu = 0.0;  // <= 0: max(lambda, 0.1 median(C))
};

/// max(lambda, 0.1 median(C)); falls back to a tenth of the largest cost
/// (or 1) when that is zero.
double default_mu(const qrot::QrotInstance& inst);

/// Xi = X * exp(-(C + lambda X) / mu). Throws Underflow if every entry is 0.
Matrix gibbs_kernel(const qrot::QrotInstance& inst, const Matrix& plan, double mu);

/// u = alpha ./ (Xi v); afterwards Diag(u) Xi Diag(v) has row sums alpha.
Vector sinkhorn_row_update(const Matrix& xi, const Vector& v, const Vector& alpha);
/// v = beta ./ (Xi^T u); afterwards Diag(u) Xi Diag(v) has column sums beta.
Vector sinkhorn_col_update(const Matrix& xi, const Vector& u, const Vector& beta);

struct IbpgmResult {
  Vector f;  // mu log u
  Vector g;  // mu log v
  Matrix plan;
  int iterations = 0;
  qrot::QrotResiduals residuals;
  double mu = 0.0;
  double seconds = 0.0;
};

using IbpgmObserver = std::function<void(int iter, const qrot::QrotResiduals&)>;

/// Starts from X = alpha beta^T; stops once residuals.res < tol or after
/// max_iter outer steps.
IbpgmResult ibpgm_warmstart(const qrot::QrotInstance& inst, const IbpgmConfig& cfg = {},
                            const IbpgmObserver& observer = {});

}  // namespace ripalm::baselines
