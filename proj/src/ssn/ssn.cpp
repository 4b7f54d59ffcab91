#include "ripalm/ssn/ssn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ripalm/error.hpp"

namespace ripalm {

double newton_tolerance(double gnorm, const SsnConfig& cfg) {
  return std::max(cfg.tol_floor, std::min(cfg.mu_bar, std::pow(gnorm, 1.0 + cfg.mu)));
}

LinesearchResult armijo_linesearch(Subproblem& sub, const Vector& y, const Vector& d,
                                   const Vector& g, double value_y, const SsnConfig& cfg) {
  const double slope = g.dot(d);
  if (!(slope < 0.0)) {
    std::ostringstream msg;
    msg << "armijo: direction is not a descent direction (<g, d> = " << slope << ")";
    throw LinesearchFailed(msg.str());
  }
  LinesearchResult out;
  Vector trial(y.size());
  double step = 1.0;
  for (int i = 0; i <= cfg.max_backtracks; ++i) {
    trial = y + step * d;
    const double value = sub.value(trial);
    const double change = value - value_y;
    if (change <= cfg.eta * step * slope) {
      out.step = step;
      out.backtracks = i;
      out.value = value;
      return out;
    }
    if (i == 0) {
      const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                           std::max(std::abs(value), std::abs(value_y));
      if (std::abs(change) <= noise) {
        Vector g_trial(y.size());
        sub.gradient(trial, g_trial);
        if (g_trial.norm() < g.norm()) {
          out.step = 1.0;
          out.value = value;
          out.noise_floor = true;
          return out;
        }
      }
    }
    step *= cfg.delta;
  }
  std::ostringstream msg;
  msg << "armijo: no sufficient decrease after " << cfg.max_backtracks
      << " backtracks (<g, d> = " << slope << ")";
  throw LinesearchFailed(msg.str());
}

SsnResult ssn_solve(Subproblem& sub, const Vector& y0, const AcceptFn& accept,
                    const SsnConfig& cfg) {
  SsnResult out;
  out.y = y0;
  out.gradient.resize(y0.size());
  sub.gradient(out.y, out.gradient);
  out.value = sub.value(out.y);
  while (!accept(out.y, out.gradient)) {
    if (out.iterations >= cfg.max_inner) {
      std::ostringstream msg;
      msg << "ssn: acceptance test not met after " << cfg.max_inner
          << " Newton steps (|grad| = " << out.gradient.norm() << ")";
      throw InnerBudgetExhausted(msg.str());
    }
    const double tol = newton_tolerance(out.gradient.norm(), cfg);
    const Vector d = sub.newton_direction(out.y, out.gradient, tol);
    const LinesearchResult ls = armijo_linesearch(sub, out.y, d, out.gradient, out.value, cfg);
    out.y += ls.step * d;
    out.value = ls.value;
    out.backtracks += ls.backtracks;
    ++out.iterations;
    sub.gradient(out.y, out.gradient);
  }
  return out;
}

}  // namespace ripalm
