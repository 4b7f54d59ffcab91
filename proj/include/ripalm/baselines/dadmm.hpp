#pragma once

// Dual ADMM baselines for the transport and BPDN problems. Both keep their
// multipliers (X, resp. (s, t)) unscaled, so penalty changes need no
// rescaling.

#include <functional>
#include <memory>

#include "ripalm/baselines/penalty.hpp"
#include "ripalm/bpdn/bpdn.hpp"
#include "ripalm/numerics/linsolve.hpp"
#include "ripalm/qrot/instance.hpp"
#include "ripalm/qrot/kkt.hpp"

namespace ripalm::baselines {

struct AdmmConfig {
  double sigma0 = 0.0;  // <= 0: problem default
  double step = 1.618;  // must lie in (0, (1 + sqrt 5) / 2)
  bool adapt = true;
  PenaltyRule rule;
  int max_iter = 10000;
  double tol = 1e-6;
};

/// Throws InputError for a step outside (0, golden ratio) or a bad budget.
void validate(const AdmmConfig& cfg);

struct AdmmReport {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  double sigma = 0.0;  // final penalty
  double seconds = 0.0;
};

// ---------------------------------------------------------------------------
// Transport: min -alpha^T u - beta^T v + f*(W)  s.t.  u 1^T + 1 v^T = W.
// ---------------------------------------------------------------------------
struct QrotAdmmState {
  Vector u;
  Vector v;
  Matrix w;
  Matrix x;
  double sigma = 1.0;
  double cost_norm = 0.0;
  // Marginals of W and X, kept in sync by every step.
  Vector w_row, w_col, x_row, x_col;
};

struct QrotAdmmStepInfo {
  double primal = 0.0;  // |u 1^T + 1 v^T - W|
  double dual = 0.0;    // sigma |B^T (W+ - W)| with B^T W = (W 1; W^T 1)
  qrot::QrotResiduals kkt;
};

/// Zero start (u, v, W, X all zero) with sigma0 = 0.01 / |C|_F unless set.
QrotAdmmState dadmm_qrot_init(const qrot::QrotInstance& inst, const AdmmConfig& cfg);

/// (u, v) from the normal equations with S = W - X / sigma:
///   u = (alpha / sigma + S 1) / n,  v = (beta / sigma + S^T 1) / m - (1^T u / m) 1.
void dadmm_qrot_uv(const qrot::QrotInstance& inst, QrotAdmmState& state);

/// One full iteration: (u, v) update, W = prox of f*/sigma, X update.
QrotAdmmStepInfo dadmm_qrot_step(const qrot::QrotInstance& inst, QrotAdmmState& state,
                                 const AdmmConfig& cfg);

using QrotAdmmObserver = std::function<void(int iter, const QrotAdmmStepInfo&)>;

struct QrotAdmmResult {
  QrotAdmmState state;
  AdmmReport report;
  qrot::QrotResiduals residuals;
};

QrotAdmmResult dadmm_qrot(const qrot::QrotInstance& inst, const AdmmConfig& cfg,
                          const QrotAdmmObserver& observer = {});

// ---------------------------------------------------------------------------
// BPDN: min -b^T y + indicator(|u|_inf <= 1) + kappa |v|
//       s.t. D^T y = u, -y = v, multipliers (s, t).
// ---------------------------------------------------------------------------
struct BpdnAdmmState {
  Vector y;
  Vector u;
  Vector v;
  Vector s;
  Vector t;
  Vector dty;  // D^T y for the current y
  double sigma = 1.0;
};

/// Factorization of D D^T + I, prepared once per instance.
class BpdnAdmmFactor {
 public:
  explicit BpdnAdmmFactor(const bpdn::BpdnInstance& inst);
  Vector solve(const Vector& rhs) const { return factor_.solve(rhs); }

 private:
  CholeskyFactor factor_;
};

struct BpdnAdmmStepInfo {
  double primal = 0.0;  // sqrt(|D^T y - u|^2 + |y + v|^2)
  double dual = 0.0;    // sigma sqrt(|D^T dy|^2 + |dy|^2)
  bpdn::BpdnResiduals kkt;
};

BpdnAdmmState dadmm_bpdn_init(const bpdn::BpdnInstance& inst, const AdmmConfig& cfg);

/// One iteration: u, v closed forms; (D D^T + I) y = (b - D(s - sigma u)
/// + (t - sigma v)) / sigma; s, t multiplier updates with step * sigma.
BpdnAdmmStepInfo dadmm_bpdn_step(const bpdn::BpdnInstance& inst, BpdnAdmmState& state,
                                 const AdmmConfig& cfg, const BpdnAdmmFactor& factor,
                                 double dict_norm);

using BpdnAdmmObserver = std::function<void(int iter, const BpdnAdmmStepInfo&)>;

struct BpdnAdmmResult {
  BpdnAdmmState state;
  AdmmReport report;
  bpdn::BpdnResiduals residuals;
};

/// Runs from the zero state with sigma0 = 1 unless set.
BpdnAdmmResult dadmm_bpdn(const bpdn::BpdnInstance& inst, const AdmmConfig& cfg,
                          const BpdnAdmmObserver& observer = {});

}  // namespace ripalm::baselines
