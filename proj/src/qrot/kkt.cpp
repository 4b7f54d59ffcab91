#include "ripalm/qrot/kkt.hpp"

#include <algorithm>
#include <cmath>

#include "ripalm/kernels/kernels.hpp"

namespace ripalm::qrot {

QrotResiduals combine_residuals(const QrotInstance& inst, double cost_norm,
                                const QrotKktInputs& in) {
  QrotResiduals r;
  const double row_err = (*in.row_sum - inst.alpha).norm() / (1.0 + inst.alpha.norm());
  const double col_err = (*in.col_sum - inst.beta).norm() / (1.0 + inst.beta.norm());
  const double neg_err = std::sqrt(in.neg_plan_sq) / (1.0 + std::sqrt(in.plan_sq));
  r.primal = std::max({row_err, col_err, neg_err});
  r.dual = std::sqrt(in.neg_z_sq) / (1.0 + cost_norm);
  r.comp = std::abs(in.plan_dot_z) / (1.0 + cost_norm);
  r.pobj = 0.5 * inst.lambda * in.plan_sq + in.cost_dot_plan;
  r.dobj = in.dual_linear;
  if (inst.lambda > 0.0) r.dobj -= in.conj_sq / (2.0 * inst.lambda);
  r.gap = std::abs(r.pobj - r.dobj) / (1.0 + std::abs(r.pobj) + std::abs(r.dobj));
  r.res = std::max({r.primal, r.dual, r.comp, r.gap});
  return r;
}

QrotResiduals kkt_residuals(const QrotInstance& inst, const Vector& u, const Vector& v,
                            const double* plan) {
  Vector row(inst.m());
  Vector col(inst.n());
  kernels::KktPassInput in;
  in.plan = plan;
  in.cost = inst.cost.data();
  in.u = u.data();
  in.v = v.data();
  in.m = inst.m();
  in.n = inst.n();
  in.lambda = inst.lambda;
  kernels::KktSums sums;
  kernels::kkt_pass(in, row.data(), col.data(), sums);
  QrotKktInputs k;
  k.row_sum = &row;
  k.col_sum = &col;
  k.neg_plan_sq = sums.neg_plan_sq;
  k.plan_sq = sums.plan_sq;
  k.neg_z_sq = sums.neg_z_sq;
  k.plan_dot_z = sums.plan_dot_z;
  k.cost_dot_plan = sums.cost_dot_plan;
  k.conj_sq = sums.conj_sq;
  k.dual_linear = inst.alpha.dot(u) + inst.beta.dot(v);
  return combine_residuals(inst, inst.cost.norm(), k);
}

QrotResiduals kkt_residuals(const QrotInstance& inst, const Vector& u, const Vector& v,
                            const Matrix& plan) {
  return kkt_residuals(inst, u, v, plan.data());
}

QrotResiduals certify(const QrotInstance& inst, const Vector& u, const Vector& v,
                      const Matrix& plan) {
  const Index m = inst.m();
  const Index n = inst.n();
  const Matrix potentials = u * Eigen::RowVectorXd::Ones(n) + Eigen::VectorXd::Ones(m) * v.transpose();
  const Matrix z = inst.cost + inst.lambda * plan - potentials;
  const double c_norm = inst.cost.norm();

  QrotResiduals r;
  const Vector rows = plan * Eigen::VectorXd::Ones(n);
  const Vector cols = plan.transpose() * Eigen::VectorXd::Ones(m);
  r.primal = std::max({(rows - inst.alpha).norm() / (1.0 + inst.alpha.norm()),
                       (cols - inst.beta).norm() / (1.0 + inst.beta.norm()),
                       plan.cwiseMin(0.0).norm() / (1.0 + plan.norm())});
  r.dual = z.cwiseMin(0.0).norm() / (1.0 + c_norm);
  r.comp = std::abs((plan.array() * z.array()).sum()) / (1.0 + c_norm);
  r.pobj = 0.5 * inst.lambda * plan.squaredNorm() + (inst.cost.array() * plan.array()).sum();
  r.dobj = inst.alpha.dot(u) + inst.beta.dot(v);
  if (inst.lambda > 0.0) {
    r.dobj -= (potentials - inst.cost).cwiseMax(0.0).squaredNorm() / (2.0 * inst.lambda);
  }
  r.gap = std::abs(r.pobj - r.dobj) / (1.0 + std::abs(r.pobj) + std::abs(r.dobj));
  r.res = std::max({r.primal, r.dual, r.comp, r.gap});
  return r;
}

}  // namespace ripalm::qrot
