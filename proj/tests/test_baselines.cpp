#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ripalm/baselines/dadmm.hpp"
#include "ripalm/baselines/ibpgm.hpp"
#include "ripalm/baselines/penalty.hpp"
#include "ripalm/cli/pipeline.hpp"
#include "ripalm/error.hpp"
#include "ripalm/qrot/instance.hpp"
#include "test_util.hpp"

namespace ripalm::baselines {
namespace {

using ripalm::testing::gaussian_vector;

qrot::QrotInstance zero_cost_2x2() {
  qrot::QrotInstance inst;
  inst.cost = Matrix::Zero(2, 2);
  inst.alpha = Vector::Constant(2, 0.5);
  inst.beta = Vector::Constant(2, 0.5);
  return inst;
}

void sync_marginals(QrotAdmmState& s) {
  s.w_row = s.w.rowwise().sum();
  s.w_col = s.w.colwise().sum().transpose();
  s.x_row = s.x.rowwise().sum();
  s.x_col = s.x.colwise().sum().transpose();
}

TEST(Penalty, BalancedResidualsKeepSigma) {
  EXPECT_EQ(adapt_penalty(3.0, 1.0, 1.0), 3.0);
  EXPECT_EQ(adapt_penalty(3.0, 5.0, 1.0), 3.0);
}

TEST(Penalty, ImbalanceScales) {
  EXPECT_EQ(adapt_penalty(3.0, 100.0, 1.0), 6.0);
  EXPECT_EQ(adapt_penalty(3.0, 1.0, 100.0), 1.5);
}

TEST(Penalty, Clamped) {
  PenaltyRule rule;
  rule.max_sigma = 4.0;
  rule.min_sigma = 2.0;
  EXPECT_EQ(adapt_penalty(3.0, 100.0, 1.0, rule), 4.0);
  EXPECT_EQ(adapt_penalty(3.0, 1.0, 100.0, rule), 2.0);
}

TEST(AdmmConfig, RejectsLongStep) {
  AdmmConfig cfg;
  cfg.step = 1.7;
  EXPECT_THROW(validate(cfg), InputError);
  cfg.step = 1.0;
  EXPECT_NO_THROW(validate(cfg));
}

TEST(QrotAdmm, UvSolvesNormalEquations) {
  std::mt19937_64 rng(1);
  const qrot::QrotInstance inst = qrot::gaussian_mixture_instance(7, 5, 2);
  QrotAdmmState s = dadmm_qrot_init(inst, AdmmConfig{});
  s.sigma = 0.7;
  s.w = gaussian_vector(35, rng).reshaped(7, 5);
  s.x = gaussian_vector(35, rng).reshaped(7, 5);
  sync_marginals(s);
  dadmm_qrot_uv(inst, s);
  const Matrix sm = s.w - s.x / s.sigma;
  const auto m = static_cast<double>(inst.m());
  const auto n = static_cast<double>(inst.n());
  const Vector ru = -inst.alpha + s.sigma * (n * s.u + Vector::Constant(7, s.v.sum()) -
                                             sm.rowwise().sum());
  const Vector rv = -inst.beta + s.sigma * (m * s.v + Vector::Constant(5, s.u.sum()) -
                                            sm.colwise().sum().transpose());
  EXPECT_LE(ru.norm() + rv.norm(), 1e-12);
}

TEST(QrotAdmm, UvTwoByTwoExample) {
  const qrot::QrotInstance inst = zero_cost_2x2();
  AdmmConfig cfg;
  cfg.sigma0 = 1.0;
  QrotAdmmState s = dadmm_qrot_init(inst, cfg);
  dadmm_qrot_uv(inst, s);
  EXPECT_DOUBLE_EQ(s.u[0], 0.25);
  EXPECT_DOUBLE_EQ(s.u[1], 0.25);
  EXPECT_DOUBLE_EQ(s.v[0], 0.0);
  EXPECT_DOUBLE_EQ(s.v[1], 0.0);
}

TEST(QrotAdmm, KktPointIsFixed) {
  const qrot::QrotInstance inst = zero_cost_2x2();
  AdmmConfig cfg;
  cfg.sigma0 = 2.0;
  QrotAdmmState s = dadmm_qrot_init(inst, cfg);
  s.w = Matrix::Constant(2, 2, 0.25);
  s.x = Matrix::Constant(2, 2, 0.25);
  sync_marginals(s);
  const QrotAdmmStepInfo info = dadmm_qrot_step(inst, s, cfg);
  EXPECT_LE((s.w.array() - 0.25).abs().maxCoeff(), 1e-15);
  EXPECT_LE((s.x.array() - 0.25).abs().maxCoeff(), 1e-15);
  EXPECT_LE(info.primal, 1e-15);
  EXPECT_LE(info.kkt.res, 1e-15);
}

TEST(QrotAdmm, StepMatchesUpdateFormulas) {
  std::mt19937_64 rng(2);
  qrot::QrotInstance inst = qrot::gaussian_mixture_instance(6, 4, 3, 2.0);
  AdmmConfig cfg;
  cfg.sigma0 = 0.9;
  QrotAdmmState s = dadmm_qrot_init(inst, cfg);
  s.w = gaussian_vector(24, rng, 0.1).reshaped(6, 4);
  s.x = gaussian_vector(24, rng, 0.1).reshaped(6, 4);
  sync_marginals(s);
  const Matrix x_prev = s.x;
  dadmm_qrot_step(inst, s, cfg);
  const Matrix uv = s.u.replicate(1, 4) + s.v.transpose().replicate(6, 1);
  const Matrix q = uv + x_prev / s.sigma;
  const Matrix w = q - (q - inst.cost).cwiseMax(0.0) / (1.0 + inst.lambda * s.sigma);
  EXPECT_LE((s.w - w).norm(), 1e-14);
  EXPECT_LE((s.x - (x_prev + cfg.step * s.sigma * (uv - w))).norm(), 1e-14);
  EXPECT_LE((s.x_row - s.x.rowwise().sum()).norm(), 1e-14);
  EXPECT_LE((s.w_col - s.w.colwise().sum().transpose()).norm(), 1e-14);
}

TEST(QrotAdmm, ResidualDecreases) {
  const qrot::QrotInstance inst = qrot::gaussian_mixture_instance(20, 20, 5);
  AdmmConfig cfg;
  cfg.max_iter = 3000;
  const QrotAdmmResult r = dadmm_qrot(inst, cfg);
  EXPECT_LT(r.residuals.res, 1e-3);
  EXPECT_NEAR(r.residuals.res, qrot::certify(inst, r.state.u, r.state.v, r.state.x).res, 1e-10);
}

TEST(BpdnAdmm, StepMatchesUpdateFormulas) {
  std::mt19937_64 rng(3);
  const bpdn::SyntheticBpdn data = bpdn::synthetic_instance(8, 20, 3, 0.1, 4);
  const bpdn::BpdnInstance& inst = data.instance;
  AdmmConfig cfg;
  BpdnAdmmState s = dadmm_bpdn_init(inst, cfg);
  s.y = gaussian_vector(8, rng);
  s.dty = inst.dict.transpose() * s.y;
  s.s = gaussian_vector(20, rng, 3.0);
  s.t = gaussian_vector(8, rng, 3.0);
  const Vector s_prev = s.s;
  const Vector t_prev = s.t;
  const Vector y_prev = s.y;
  const BpdnAdmmFactor factor(inst);
  dadmm_bpdn_step(inst, s, cfg, factor, inst.dict.norm());
  const double sigma = s.sigma;

  EXPECT_LE(s.u.lpNorm<Eigen::Infinity>(), 1.0);
  const Vector raw = inst.dict.transpose() * y_prev + s_prev / sigma;
  EXPECT_LE((s.u - raw.cwiseMax(-1.0).cwiseMin(1.0)).norm(), 1e-14);
  const Vector shifted = t_prev - sigma * y_prev;
  EXPECT_LE((sigma * s.v + bpdn::proj_l2ball(shifted, inst.kappa) - shifted).norm(), 1e-13);

  const Matrix gram = inst.dict * inst.dict.transpose() + Matrix::Identity(8, 8);
  const Vector rhs = (inst.b - inst.dict * (s_prev - sigma * s.u) + (t_prev - sigma * s.v)) / sigma;
  EXPECT_LE((gram * s.y - rhs).norm(), 1e-10 * (1.0 + rhs.norm()));
  EXPECT_LE((s.s - (s_prev + cfg.step * sigma * (inst.dict.transpose() * s.y - s.u))).norm(),
            1e-12);
  EXPECT_LE((s.t - (t_prev + cfg.step * sigma * (-s.y - s.v))).norm(), 1e-12);
}

TEST(BpdnAdmm, Converges) {
  const bpdn::SyntheticBpdn data = bpdn::synthetic_instance(20, 80, 4, 0.05, 5);
  AdmmConfig cfg;
  cfg.tol = 1e-5;
  const BpdnAdmmResult r = dadmm_bpdn(data.instance, cfg);
  EXPECT_TRUE(r.report.converged);
  EXPECT_LT(bpdn::certify(data.instance, r.state.s, r.state.t, r.state.y).res, 1e-5);
}

TEST(Sinkhorn, UpdatesMatchMarginals) {
  std::mt19937_64 rng(4);
  const qrot::QrotInstance inst = qrot::gaussian_mixture_instance(9, 6, 6);
  const Matrix xi = gibbs_kernel(inst, inst.alpha * inst.beta.transpose(), default_mu(inst));
  Vector v = Vector::Ones(6);
  for (int sweep = 0; sweep < 5; ++sweep) {
    const Vector u = sinkhorn_row_update(xi, v, inst.alpha);
    EXPECT_LE((u.asDiagonal() * xi * v - inst.alpha).norm(), 1e-15);
    v = sinkhorn_col_update(xi, u, inst.beta);
    const Matrix plan = u.asDiagonal() * xi * v.asDiagonal();
    EXPECT_LE((plan.colwise().sum().transpose() - inst.beta).norm(), 1e-15);
  }
}

TEST(Sinkhorn, OnesKernelExample) {
  const Matrix xi = Matrix::Ones(2, 2);
  const Vector alpha{{0.25, 0.75}};
  const Vector beta{{0.5, 0.5}};
  const Vector u = sinkhorn_row_update(xi, Vector::Ones(2), alpha);
  EXPECT_DOUBLE_EQ(u[0], 0.125);
  EXPECT_DOUBLE_EQ(u[1], 0.375);
  const Vector v = sinkhorn_col_update(xi, u, beta);
  EXPECT_DOUBLE_EQ(v[0], 1.0);
  EXPECT_DOUBLE_EQ(v[1], 1.0);
}

TEST(Sinkhorn, GibbsKernelFormula) {
  const qrot::QrotInstance inst = qrot::gaussian_mixture_instance(5, 7, 7, 0.5);
  const Matrix plan = inst.alpha * inst.beta.transpose();
  const double mu = 0.8;
  const Matrix xi = gibbs_kernel(inst, plan, mu);
  const Matrix expected =
      plan.array() * (-(inst.cost.array() + inst.lambda * plan.array()) / mu).exp();
  EXPECT_LE((xi - expected).norm(), 1e-14 * expected.norm());
}

TEST(Sinkhorn, UnderflowDetected) {
  qrot::QrotInstance inst = zero_cost_2x2();
  inst.cost = Matrix::Constant(2, 2, 1.0);
  EXPECT_THROW(gibbs_kernel(inst, Matrix::Constant(2, 2, 0.25), 1e-6), Underflow);
}

TEST(Ibpgm, DefaultMu) {
  qrot::QrotInstance inst = qrot::gaussian_mixture_instance(10, 10, 1);
  EXPECT_EQ(default_mu(inst), 1.0);
  inst.lambda = 0.0;
  EXPECT_GT(default_mu(inst), 0.0);
  EXPECT_LT(default_mu(inst), 0.1);
}

TEST(Ibpgm, MuBelowLambdaRejected) {
  const qrot::QrotInstance inst = qrot::gaussian_mixture_instance(6, 6, 2);
  IbpgmConfig cfg;
  cfg.mu = 0.5;
  EXPECT_THROW(ibpgm_warmstart(inst, cfg), InputError);
}

TEST(Ibpgm, IteratesKeepExactMarginals) {
  const qrot::QrotInstance inst = qrot::gaussian_mixture_instance(15, 11, 3);
  IbpgmConfig cfg;
  cfg.max_iter = 30;
  cfg.tol = 1e-12;
  const IbpgmResult r = ibpgm_warmstart(inst, cfg);
  EXPECT_EQ(r.iterations, 30);
  EXPECT_LE((r.plan.colwise().sum().transpose() - inst.beta).norm(), 1e-14);
  EXPECT_GE(r.plan.minCoeff(), 0.0);
}

TEST(WarmStart, NoMoreOuterIterationsThanCold) {
  int no_worse = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const qrot::QrotInstance inst = qrot::gaussian_mixture_instance(25, 25, seed);
    cli::QrotRunOptions warm;
    cli::QrotRunOptions cold;
    cold.warm_start = false;
    const cli::QrotRun a = cli::run_qrot_ripalm(inst, warm);
    const cli::QrotRun b = cli::run_qrot_ripalm(inst, cold);
    ASSERT_EQ(a.solution.report.status, SolveStatus::kConverged);
    ASSERT_EQ(b.solution.report.status, SolveStatus::kConverged);
    if (a.solution.report.iterations.size() <= b.solution.report.iterations.size()) ++no_worse;
  }
  EXPECT_GE(no_worse, 8);
}

}  // namespace
}  // namespace ripalm::baselines
