#pragma once

#include "ripalm/core/ripalm.hpp"
#include "ripalm/qrot/instance.hpp"
#include "ripalm/qrot/kkt.hpp"

namespace ripalm::qrot {

struct QrotSolution {
  Vector u;
  Vector v;
  Matrix plan;
  RipalmState state;
  SolveReport report;
  QrotResiduals residuals;
};

/// ripALM from the given starting point; stops on residuals(...).res < cfg.tol.
QrotSolution solve_ripalm(const QrotInstance& inst, const RipalmConfig& cfg, const Vector& u0,
                          const Vector& v0, const Matrix& plan0, const Observer& observer = {});

/// Same, started from u = v = 0, X = 0.
QrotSolution solve_ripalm(const QrotInstance& inst, const RipalmConfig& cfg,
                          const Observer& observer = {});

}  // namespace ripalm::qrot
