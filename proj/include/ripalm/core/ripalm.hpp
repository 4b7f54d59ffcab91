#pragma once

// Relative-type inexact proximal augmented Lagrangian method for
//
//   min_x f(x)  s.t.  A x = b,
//
// run on the dual variable y. Each outer step approximately minimizes
//   L_sigma(y, x_k) + tau / (2 sigma) |y - y_k|^2
// with a semismooth Newton method, stopping the inner loop as soon as the
// relative acceptance test
//   2 |<w - y+, sigma D>| + |sigma D|^2
//       <= rho (|prox(x_k + sigma A^T y+) - x_k|^2 + tau |y+ - y_k|^2)
// holds, where D is the subproblem gradient at y+ and w an error variable.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ripalm/numerics/dense.hpp"
#include "ripalm/ssn/ssn.hpp"

namespace ripalm {

/// Problem data seen by the outer loop: f through its proximal map, the
/// constraint operator A (dual_dim x primal_dim) and b.
class ProblemOracle {
 public:
  virtual ~ProblemOracle() = default;

  virtual Index dual_dim() const = 0;
  virtual Index primal_dim() const = 0;
  virtual void apply_A(const Vector& x, Vector& out) const = 0;
  virtual void apply_At(const Vector& y, Vector& out) const = 0;
  virtual void prox(const Vector& point, double sigma, Vector& out) const = 0;
  virtual const Vector& b() const = 0;

  /// The proximal subproblem around (xbar, ybar).
  virtual std::unique_ptr<Subproblem> make_subproblem(const Vector& xbar, const Vector& ybar,
                                                      double sigma, double tau) const = 0;

  /// prox(xbar + sigma A^T y). Bindings may override with a fused version.
  virtual void prox_step(const Vector& xbar, const Vector& y, double sigma, Vector& out) const;
};

/// A prox(x + sigma A^T y) - b.
Vector aug_lag_gradient(const ProblemOracle& oracle, const Vector& y, const Vector& x,
                        double sigma);

/// 2 |<w - y_next, sigma D>| + |sigma D|^2.
double criterion_lhs(const Vector& w, const Vector& y_next, const Vector& delta, double sigma);

/// rho (|prox(x_prev + sigma A^T y_next) - x_prev|^2 + tau |y_next - y_prev|^2).
double criterion_rhs(const ProblemOracle& oracle, const Vector& x_prev, const Vector& y_next,
                     const Vector& y_prev, double sigma, double tau, double rho);

using Schedule = std::function<double(int k)>;

struct RipalmConfig {
  double rho = 0.99;
  Schedule sigma;
  Schedule tau;
  int max_outer = 500;
  double tol = 1e-6;
  SsnConfig ssn;
};

/// sigma_k = min(1e4, max(1e-4, 1.5^k)).
double default_sigma(int k);
Schedule capped_geometric_sigma(double growth, double floor, double cap);
Schedule constant_schedule(double value);

/// rho = 0.99, tau = 5, the geometric sigma schedule above.
RipalmConfig default_schedules();

/// Human-readable warnings for parameter choices outside the convergence-rate
/// regime (currently: sqrt(min tau_k) <= 2 sqrt(rho) over the run horizon).
/// Also throws InputError for outright invalid values (rho outside [0, 1),
/// non-positive sigma or tau).
std::vector<std::string> parameter_warnings(const RipalmConfig& cfg);

struct RipalmState {
  Vector y;
  Vector x;
  Vector w;
  int k = 0;
  Vector delta;  // subproblem gradient at the accepted y
  Vector theta;  // delta - (tau / sigma) (y_{k+1} - y_k)
  Vector xi;     // (x_k - x_{k+1}) / sigma
};

RipalmState initial_state(Vector y0, Vector x0);

struct IterationRecord {
  int k = 0;
  double sigma = 0.0;
  double tau = 0.0;
  int inner_iterations = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double norm_y = 0.0;
  double norm_x = 0.0;
  double norm_w = 0.0;
  double norm_delta = 0.0;
  double norm_theta = 0.0;
  double norm_xi = 0.0;
};

/// kStalled: the inner solver could not meet the acceptance test (typically
/// once the steps shrink to rounding level); the last accepted iterate is
/// returned.
enum class SolveStatus { kConverged, kMaxIterations, kStalled };

const char* status_name(SolveStatus status);

struct SolveReport {
  std::vector<IterationRecord> iterations;
  SolveStatus status = SolveStatus::kMaxIterations;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  int total_inner = 0;
  double seconds = 0.0;
  std::string stall_reason;
};

struct StepInfo {
  int inner_iterations = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// One outer iteration. Throws SubsolverStalled if the inner solver cannot
/// meet the acceptance test.
RipalmState ripalm_step(const ProblemOracle& oracle, const RipalmState& state,
                        const RipalmConfig& cfg, StepInfo* info = nullptr);

using ResidualFn = std::function<double(const RipalmState&)>;
using Observer = std::function<void(const RipalmState&, const IterationRecord&)>;

/// Iterates until residual(state) < cfg.tol or cfg.max_outer steps. On the
/// iteration cap the last state is returned with status kMaxIterations; if
/// an outer step stalls, the last accepted state with status kStalled.
RipalmState ripalm_solve(const ProblemOracle& oracle, const RipalmConfig& cfg,
                         const ResidualFn& residual, RipalmState init, SolveReport& report,
                         const Observer& observer = {});

}  // namespace ripalm
