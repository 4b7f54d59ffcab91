#include "ripalm/core/ripalm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "ripalm/error.hpp"

namespace ripalm {

void ProblemOracle::prox_step(const Vector& xbar, const Vector& y, double sigma,
                              Vector& out) const {
  Vector aty(primal_dim());
  apply_At(y, aty);
  prox(xbar + sigma * aty, sigma, out);
}

Vector aug_lag_gradient(const ProblemOracle& oracle, const Vector& y, const Vector& x,
                        double sigma) {
  Vector p(oracle.primal_dim());
  oracle.prox_step(x, y, sigma, p);
  Vector ap(oracle.dual_dim());
  oracle.apply_A(p, ap);
  return ap - oracle.b();
}

double criterion_lhs(const Vector& w, const Vector& y_next, const Vector& delta, double sigma) {
  const Vector scaled = sigma * delta;
  return 2.0 * std::abs((w - y_next).dot(scaled)) + scaled.squaredNorm();
}

double criterion_rhs(const ProblemOracle& oracle, const Vector& x_prev, const Vector& y_next,
                     const Vector& y_prev, double sigma, double tau, double rho) {
  Vector p(oracle.primal_dim());
  oracle.prox_step(x_prev, y_next, sigma, p);
  return rho * ((p - x_prev).squaredNorm() + tau * (y_next - y_prev).squaredNorm());
}

double default_sigma(int k) { return std::min(1e4, std::max(1e-4, std::pow(1.5, k))); }

Schedule capped_geometric_sigma(double growth, double floor, double cap) {
  return [=](int k) { return std::min(cap, std::max(floor, std::pow(growth, k))); };
}

Schedule constant_schedule(double value) {
  return [value](int) { return value; };
}

RipalmConfig default_schedules() {
  RipalmConfig cfg;
  cfg.rho = 0.99;
  cfg.sigma = default_sigma;
  cfg.tau = constant_schedule(5.0);
  return cfg;
}

std::vector<std::string> parameter_warnings(const RipalmConfig& cfg) {
  if (!(cfg.rho >= 0.0 && cfg.rho < 1.0)) {
    throw InputError("rho must lie in [0, 1)");
  }
  if (!cfg.sigma || !cfg.tau) throw InputError("sigma and tau schedules must be set");
  const int horizon = std::max(1, cfg.max_outer);
  double tau_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k < horizon; ++k) {
    const double sigma = cfg.sigma(k);
    const double tau = cfg.tau(k);
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw InputError("sigma schedule must be positive and finite");
    }
    if (!(tau > 0.0) || !std::isfinite(tau)) {
      throw InputError("tau schedule must be positive and finite");
    }
    tau_min = std::min(tau_min, tau);
  }
  std::vector<std::string> warnings;
  if (std::sqrt(tau_min) <= 2.0 * std::sqrt(cfg.rho)) {
    std::ostringstream msg;
    msg << "sqrt(tau_min) = " << std::sqrt(tau_min) << " <= 2 sqrt(rho) = "
        << 2.0 * std::sqrt(cfg.rho)
        << ": the linear-rate guarantee does not apply; use tau_min > 4 rho";
    warnings.push_back(msg.str());
  }
  return warnings;
}

RipalmState initial_state(Vector y0, Vector x0) {
  RipalmState s;
  s.w = Vector::Zero(y0.size());
  s.delta = Vector::Zero(y0.size());
  s.theta = Vector::Zero(y0.size());
  s.xi = Vector::Zero(x0.size());
  s.y = std::move(y0);
  s.x = std::move(x0);
  return s;
}

const char* status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged:
      return "converged";
    case SolveStatus::kMaxIterations:
      return "max_iterations";
    case SolveStatus::kStalled:
      return "stalled";
  }
  return "unknown";
}

RipalmState ripalm_step(const ProblemOracle& oracle, const RipalmState& state,
                        const RipalmConfig& cfg, StepInfo* info) {
  const double sigma = cfg.sigma(state.k);
  const double tau = cfg.tau(state.k);
  std::unique_ptr<Subproblem> sub = oracle.make_subproblem(state.x, state.y, sigma, tau);

  double lhs = 0.0;
  double rhs = 0.0;
  const AcceptFn accept = [&](const Vector& y, const Vector& g) {
    lhs = criterion_lhs(state.w, y, g, sigma);
    rhs = cfg.rho * (sub->primal_step_sq(y) + tau * (y - state.y).squaredNorm());
    return lhs <= rhs;
  };

  SsnResult inner;
  try {
    inner = ssn_solve(*sub, state.y, accept, cfg.ssn);
  } catch (const InnerBudgetExhausted& e) {
    throw SubsolverStalled(std::string("outer step ") + std::to_string(state.k) + ": " + e.what());
  } catch (const LinesearchFailed& e) {
    throw SubsolverStalled(std::string("outer step ") + std::to_string(state.k) + ": " + e.what());
  }

  RipalmState next;
  next.k = state.k + 1;
  next.y = std::move(inner.y);
  next.x.resize(state.x.size());
  oracle.prox_step(state.x, next.y, sigma, next.x);
  next.delta = std::move(inner.gradient);
  next.w = state.w - sigma * next.delta;
  next.theta = next.delta - (tau / sigma) * (next.y - state.y);
  next.xi = (state.x - next.x) / sigma;

  if (info) {
    info->inner_iterations = inner.iterations;
    info->lhs = lhs;
    info->rhs = rhs;
  }
  return next;
}

RipalmState ripalm_solve(const ProblemOracle& oracle, const RipalmConfig& cfg,
                         const ResidualFn& residual, RipalmState init, SolveReport& report,
                         const Observer& observer) {
  const auto start = std::chrono::steady_clock::now();
  report = SolveReport{};
  RipalmState state = std::move(init);
  double res = residual(state);
  report.initial_residual = res;
  bool stalled = false;
  while (!(res < cfg.tol) && state.k < cfg.max_outer) {
    StepInfo info;
    RipalmState next;
    try {
      next = ripalm_step(oracle, state, cfg, &info);
    } catch (const SubsolverStalled& e) {
      report.stall_reason = e.what();
      stalled = true;
      break;
    }
    IterationRecord rec;
    rec.k = state.k;
    rec.sigma = cfg.sigma(state.k);
    rec.tau = cfg.tau(state.k);
    rec.inner_iterations = info.inner_iterations;
    rec.lhs = info.lhs;
    rec.rhs = info.rhs;
    state = std::move(next);
    res = residual(state);
    rec.residual = res;
    rec.norm_y = state.y.norm();
    rec.norm_x = state.x.norm();
    rec.norm_w = state.w.norm();
    rec.norm_delta = state.delta.norm();
    rec.norm_theta = state.theta.norm();
    rec.norm_xi = state.xi.norm();
    report.total_inner += info.inner_iterations;
    report.iterations.push_back(rec);
    if (observer) observer(state, rec);
  }
  report.final_residual = res;
  if (res < cfg.tol) {
    report.status = SolveStatus::kConverged;
  } else {
    report.status = stalled ? SolveStatus::kStalled : SolveStatus::kMaxIterations;
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return state;
}

}  // namespace ripalm
