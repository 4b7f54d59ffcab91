#pragma once

// Semismooth Newton method for the strongly convex subproblems of the outer
// proximal ALM loop.

#include <functional>

#include "ripalm/numerics/dense.hpp"

namespace ripalm {

struct SsnConfig {
  double mu_bar = 1e-3;   // cap on the linear-solve tolerance
  double mu = 0.2;        // tolerance exponent: tol = min(mu_bar, |g|^(1+mu))
  double eta = 1e-4;      // Armijo sufficient-decrease constant
  double delta = 0.5;     // backtracking factor
  int max_inner = 200;
  int max_backtracks = 60;
  double tol_floor = 1e-14;
};

/// Smooth, strongly convex objective with a generalized Jacobian of its
/// gradient. Implementations may cache work keyed on the last evaluated point.
class Subproblem {
 public:
  virtual ~Subproblem() = default;

  virtual Index dim() const = 0;
  virtual double value(const Vector& y) = 0;
  virtual void gradient(const Vector& y, Vector& g) = 0;

  /// Returns d with ||H d + g|| <= tol for some H in the generalized
  /// Jacobian of the gradient at y.
  virtual Vector newton_direction(const Vector& y, const Vector& g, double tol) = 0;

  /// out = H d for the same Jacobian element newton_direction uses at y.
  virtual void jacobian_apply(const Vector& y, const Vector& d, Vector& out) = 0;

  /// ||prox step||^2 of the primal update implied by y (used by the outer
  /// acceptance test).
  virtual double primal_step_sq(const Vector& y) = 0;
};

/// Linear-solve tolerance for gradient norm `gnorm`.
double newton_tolerance(double gnorm, const SsnConfig& cfg);

struct LinesearchResult {
  double step = 1.0;
  int backtracks = 0;
  double value = 0.0;  // objective at y + step d
  bool noise_floor = false;
};

/// Armijo backtracking: the largest step delta^i, i = 0, 1, ..., with
///   value(y + step d) - value(y) <= eta step <g, d>.
/// Throws LinesearchFailed when i would exceed cfg.max_backtracks.
///
/// When the unit step's value change is at rounding level but the gradient
/// norm still drops, the unit step is taken (flagged via noise_floor);
/// otherwise late Newton steps could be rejected purely on cancellation.
LinesearchResult armijo_linesearch(Subproblem& sub, const Vector& y, const Vector& d,
                                   const Vector& g, double value_y, const SsnConfig& cfg);

/// Acceptance test evaluated at each inner iterate with its gradient.
using AcceptFn = std::function<bool(const Vector& y, const Vector& g)>;

struct SsnResult {
  Vector y;
  Vector gradient;
  int iterations = 0;      // Newton steps taken
  int backtracks = 0;
  double value = 0.0;
};

/// Runs Newton steps from y0 until accept(y, grad(y)) holds. The test is
/// checked at y0 before any step. Throws InnerBudgetExhausted after
/// cfg.max_inner steps.
SsnResult ssn_solve(Subproblem& sub, const Vector& y0, const AcceptFn& accept,
                    const SsnConfig& cfg);

}  // namespace ripalm
