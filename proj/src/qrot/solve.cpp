#include "ripalm/qrot/solve.hpp"

#include "ripalm/qrot/oracle.hpp"

namespace ripalm::qrot {

QrotSolution solve_ripalm(const QrotInstance& inst, const RipalmConfig& cfg, const Vector& u0,
                          const Vector& v0, const Matrix& plan0, const Observer& observer) {
  validate(inst);
  const Index m = inst.m();
  const Index n = inst.n();
  const QrotOracle oracle(inst);
  Vector y0(m + n);
  y0 << u0, v0;
  RipalmState init = initial_state(std::move(y0), ConstVectorMap(plan0.data(), m * n));

  QrotSolution out;
  out.state = ripalm_solve(
      oracle, cfg,
      [&](const RipalmState& s) {
        return kkt_residuals(inst, s.y.head(m), s.y.tail(n), s.x.data()).res;
      },
      std::move(init), out.report, observer);
  out.u = out.state.y.head(m);
  out.v = out.state.y.tail(n);
  out.plan = ConstMatrixMap(out.state.x.data(), m, n);
  out.residuals = kkt_residuals(inst, out.u, out.v, out.plan);
  return out;
}

QrotSolution solve_ripalm(const QrotInstance& inst, const RipalmConfig& cfg,
                          const Observer& observer) {
  return solve_ripalm(inst, cfg, Vector::Zero(inst.m()), Vector::Zero(inst.n()),
                      Matrix::Zero(inst.m(), inst.n()), observer);
}

}  // namespace ripalm::qrot
