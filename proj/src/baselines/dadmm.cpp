#include "ripalm/baselines/dadmm.hpp"

#include <chrono>
#include <cmath>

#include "ripalm/error.hpp"
#include "ripalm/kernels/kernels.hpp"

namespace ripalm::baselines {

namespace {

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void validate(const AdmmConfig& cfg) {
  const double golden = 0.5 * (1.0 + std::sqrt(5.0));
  if (!(cfg.step > 0.0 && cfg.step < golden)) {
    throw InputError("ADMM step must lie in (0, (1 + sqrt 5) / 2)");
  }
  if (cfg.max_iter < 0) throw InputError("ADMM iteration budget must be >= 0");
  if (!(cfg.tol > 0.0)) throw InputError("ADMM tolerance must be positive");
  if (cfg.adapt && cfg.rule.every < 1) throw InputError("penalty check interval must be >= 1");
}

QrotAdmmState dadmm_qrot_init(const qrot::QrotInstance& inst, const AdmmConfig& cfg) {
  const Index m = inst.m();
  const Index n = inst.n();
  QrotAdmmState s;
  s.cost_norm = inst.cost.norm();
  s.sigma = cfg.sigma0 > 0.0 ? cfg.sigma0 : 0.01 / std::max(s.cost_norm, 1e-300);
  s.u = Vector::Zero(m);
  s.v = Vector::Zero(n);
  s.w = Matrix::Zero(m, n);
  s.x = Matrix::Zero(m, n);
  s.w_row = Vector::Zero(m);
  s.x_row = Vector::Zero(m);
  s.w_col = Vector::Zero(n);
  s.x_col = Vector::Zero(n);
  return s;
}

void dadmm_qrot_uv(const qrot::QrotInstance& inst, QrotAdmmState& state) {
  const auto m = static_cast<double>(inst.m());
  const auto n = static_cast<double>(inst.n());
  const double inv_sigma = 1.0 / state.sigma;
  state.u = (inv_sigma * inst.alpha + state.w_row - inv_sigma * state.x_row) / n;
  state.v = (inv_sigma * inst.beta + state.w_col - inv_sigma * state.x_col) / m;
  state.v.array() -= state.u.sum() / m;
}

QrotAdmmStepInfo dadmm_qrot_step(const qrot::QrotInstance& inst, QrotAdmmState& state,
                                 const AdmmConfig& cfg) {
  const Vector prev_row = state.w_row;
  const Vector prev_col = state.w_col;
  dadmm_qrot_uv(inst, state);

  kernels::AdmmPassInput in;
  in.cost = inst.cost.data();
  in.u = state.u.data();
  in.v = state.v.data();
  in.m = inst.m();
  in.n = inst.n();
  in.sigma = state.sigma;
  in.lambda = inst.lambda;
  in.step = cfg.step;
  kernels::AdmmPassOutput out;
  out.w_row = state.w_row.data();
  out.w_col = state.w_col.data();
  out.x_row = state.x_row.data();
  out.x_col = state.x_col.data();
  kernels::admm_pass(in, state.w.data(), state.x.data(), out);

  QrotAdmmStepInfo info;
  info.primal = std::sqrt(out.primal_sq);
  info.dual = state.sigma * std::sqrt((state.w_row - prev_row).squaredNorm() +
                                      (state.w_col - prev_col).squaredNorm());
  qrot::QrotKktInputs k;
  k.row_sum = &state.x_row;
  k.col_sum = &state.x_col;
  k.neg_plan_sq = out.kkt.neg_plan_sq;
  k.plan_sq = out.kkt.plan_sq;
  k.neg_z_sq = out.kkt.neg_z_sq;
  k.plan_dot_z = out.kkt.plan_dot_z;
  k.cost_dot_plan = out.kkt.cost_dot_plan;
  k.conj_sq = out.kkt.conj_sq;
  k.dual_linear = inst.alpha.dot(state.u) + inst.beta.dot(state.v);
  info.kkt = qrot::combine_residuals(inst, state.cost_norm, k);
  return info;
}

QrotAdmmResult dadmm_qrot(const qrot::QrotInstance& inst, const AdmmConfig& cfg,
                          const QrotAdmmObserver& observer) {
  validate(cfg);
  qrot::validate(inst);
  const auto start = std::chrono::steady_clock::now();
  QrotAdmmResult out;
  out.state = dadmm_qrot_init(inst, cfg);
  out.residuals = qrot::kkt_residuals(inst, out.state.u, out.state.v, out.state.x);
  for (int it = 1; it <= cfg.max_iter; ++it) {
    const QrotAdmmStepInfo info = dadmm_qrot_step(inst, out.state, cfg);
    out.residuals = info.kkt;
    out.report.iterations = it;
    if (observer) observer(it, info);
    if (info.kkt.res < cfg.tol) break;
    if (cfg.adapt && it % cfg.rule.every == 0) {
      out.state.sigma = adapt_penalty(out.state.sigma, info.primal, info.dual, cfg.rule);
    }
  }
  out.report.residual = out.residuals.res;
  out.report.converged = out.residuals.res < cfg.tol;
  out.report.sigma = out.state.sigma;
  out.report.seconds = elapsed_since(start);
  return out;
}

BpdnAdmmFactor::BpdnAdmmFactor(const bpdn::BpdnInstance& inst)
    : factor_([&] {
        const Index m = inst.m();
        Matrix gram = Matrix::Identity(m, m);
        gram.selfadjointView<Eigen::Lower>().rankUpdate(inst.dict);
        gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
        return gram;
      }()) {}

BpdnAdmmState dadmm_bpdn_init(const bpdn::BpdnInstance& inst, const AdmmConfig& cfg) {
  BpdnAdmmState s;
  s.sigma = cfg.sigma0 > 0.0 ? cfg.sigma0 : 1.0;
  s.y = Vector::Zero(inst.m());
  s.v = Vector::Zero(inst.m());
  s.t = Vector::Zero(inst.m());
  s.u = Vector::Zero(inst.n());
  s.s = Vector::Zero(inst.n());
  s.dty = Vector::Zero(inst.n());
  return s;
}

BpdnAdmmStepInfo dadmm_bpdn_step(const bpdn::BpdnInstance& inst, BpdnAdmmState& state,
                                 const AdmmConfig& cfg, const BpdnAdmmFactor& factor,
                                 double dict_norm) {
  const double sigma = state.sigma;
  state.u = (state.dty + state.s / sigma).cwiseMax(-1.0).cwiseMin(1.0);
  const Vector shifted = state.t - sigma * state.y;
  state.v = (shifted - bpdn::proj_l2ball(shifted, inst.kappa)) / sigma;

  const Vector rhs =
      (inst.b - inst.dict * (state.s - sigma * state.u) + (state.t - sigma * state.v)) / sigma;
  Vector y_next = factor.solve(rhs);
  Vector dty_next = inst.dict.transpose() * y_next;

  const Vector r_s = dty_next - state.u;
  const Vector r_t = -y_next - state.v;
  state.s += (cfg.step * sigma) * r_s;
  state.t += (cfg.step * sigma) * r_t;

  BpdnAdmmStepInfo info;
  info.primal = std::sqrt(r_s.squaredNorm() + r_t.squaredNorm());
  info.dual = sigma * std::sqrt((dty_next - state.dty).squaredNorm() +
                                (y_next - state.y).squaredNorm());
  state.y = std::move(y_next);
  state.dty = std::move(dty_next);
  info.kkt = bpdn::kkt_residuals(inst, state.s, state.t, state.y, dict_norm);
  return info;
}

BpdnAdmmResult dadmm_bpdn(const bpdn::BpdnInstance& inst, const AdmmConfig& cfg,
                          const BpdnAdmmObserver& observer) {
  validate(cfg);
  bpdn::validate(inst);
  const auto start = std::chrono::steady_clock::now();
  const BpdnAdmmFactor factor(inst);
  const double dict_norm = inst.dict.norm();
  BpdnAdmmResult out;
  out.state = dadmm_bpdn_init(inst, cfg);
  out.residuals = bpdn::kkt_residuals(inst, out.state.s, out.state.t, out.state.y, dict_norm);
  for (int it = 1; it <= cfg.max_iter; ++it) {
    const BpdnAdmmStepInfo info = dadmm_bpdn_step(inst, out.state, cfg, factor, dict_norm);
    out.residuals = info.kkt;
    out.report.iterations = it;
    if (observer) observer(it, info);
    if (info.kkt.res < cfg.tol) break;
    if (cfg.adapt && it % cfg.rule.every == 0) {
      out.state.sigma = adapt_penalty(out.state.sigma, info.primal, info.dual, cfg.rule);
    }
  }
  out.report.residual = out.residuals.res;
  out.report.converged = out.residuals.res < cfg.tol;
  out.report.sigma = out.state.sigma;
  out.report.seconds = elapsed_since(start);
  return out;
}

}  // namespace ripalm::baselines
