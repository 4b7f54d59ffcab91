#include "ripalm/baselines/ibpgm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "ripalm/error.hpp"
#include "ripalm/kernels/kernels.hpp"

namespace ripalm::baselines {

double default_mu(const qrot::QrotInstance& inst) {
  std::vector<double> costs(inst.cost.data(), inst.cost.data() + inst.cost.size());
  const auto mid = costs.begin() + static_cast<std::ptrdiff_t>(costs.size() / 2);
  std::nth_element(costs.begin(), mid, costs.end());
  double median = *mid;
  if (costs.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(costs.begin(), mid));
  }
  double mu = std::max(inst.lambda, 0.1 * median);
  if (!(mu > 0.0)) mu = 0.1 * inst.cost.maxCoeff();
  if (!(mu > 0.0)) mu = 1.0;
  return mu;
}

namespace {

void check_positive(const Vector& sums, const char* what) {
  if (!(sums.minCoeff() > 0.0) || !sums.allFinite()) {
    throw Underflow(std::string("Gibbs kernel ") + what +
                    " vanished; mu is too small for the cost scale");
  }
}

}  // namespace

Matrix gibbs_kernel(const qrot::QrotInstance& inst, const Matrix& plan, double mu) {
  Matrix xi(inst.m(), inst.n());
  Vector row(inst.m());
  const Vector ones = Vector::Ones(inst.n());
  const Index positive = kernels::gibbs_pass(inst.cost.data(), plan.data(), ones.data(), inst.m(),
                                             inst.n(), inst.lambda, mu, xi.data(), row.data());
  if (positive == 0) throw Underflow("every Gibbs kernel entry underflowed to zero");
  return xi;
}

Vector sinkhorn_row_update(const Matrix& xi, const Vector& v, const Vector& alpha) {
  const Vector sums = xi * v;
  check_positive(sums, "row sums");
  return alpha.cwiseQuotient(sums);
}

Vector sinkhorn_col_update(const Matrix& xi, const Vector& u, const Vector& beta) {
  Vector sums(xi.cols());
  kernels::scaled_col_sum(xi.data(), u.data(), xi.rows(), xi.cols(), sums.data());
  check_positive(sums, "column sums");
  return beta.cwiseQuotient(sums);
}

IbpgmResult ibpgm_warmstart(const qrot::QrotInstance& inst, const IbpgmConfig& cfg,
                            const IbpgmObserver& observer) {
  qrot::validate(inst);
  const auto start = std::chrono::steady_clock::now();
  const Index m = inst.m();
  const Index n = inst.n();
  IbpgmResult out;
  out.mu = cfg.mu > 0.0 ? cfg.mu : default_mu(inst);
  if (out.mu < inst.lambda) throw InputError("iBPGM needs mu >= lambda");

  out.plan = inst.alpha * inst.beta.transpose();
  out.f = Vector::Zero(m);
  out.g = Vector::Zero(n);
  out.residuals = qrot::kkt_residuals(inst, out.f, out.g, out.plan);

  Matrix xi(m, n);
  Vector row(m);
  Vector col(n);
  const Vector ones = Vector::Ones(n);
  for (int it = 1; it <= cfg.max_iter && !(out.residuals.res < cfg.tol); ++it) {
    const Index positive = kernels::gibbs_pass(inst.cost.data(), out.plan.data(), ones.data(), m,
                                               n, inst.lambda, out.mu, xi.data(), row.data());
    if (positive == 0) throw Underflow("every Gibbs kernel entry underflowed to zero");
    check_positive(row, "row sums");
    const Vector u = inst.alpha.cwiseQuotient(row);
    kernels::scaled_col_sum(xi.data(), u.data(), m, n, col.data());
    check_positive(col, "column sums");
    const Vector v = inst.beta.cwiseQuotient(col);
    kernels::scale_plan(xi.data(), u.data(), v.data(), m, n, out.plan.data());
    out.f = out.mu * u.array().log();
    out.g = out.mu * v.array().log();
    out.residuals = qrot::kkt_residuals(inst, out.f, out.g, out.plan);
    out.iterations = it;
    if (observer) observer(it, out.residuals);
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace ripalm::baselines
