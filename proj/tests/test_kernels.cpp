#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "ripalm/error.hpp"
#include "ripalm/kernels/kernels.hpp"
#include "test_util.hpp"

namespace ripalm::kernels {
namespace {

using ripalm::testing::gaussian_vector;

bool same_bits(const double* a, const double* b, Index len) {
  return std::memcmp(a, b, static_cast<std::size_t>(len) * sizeof(double)) == 0;
}

void require_avx2() {
  if (!isa_supported(Isa::kAvx2)) GTEST_SKIP() << "CPU lacks AVX2/FMA";
}

struct Problem {
  Index m, n;
  Vector cost, xbar, u, v, plan;
};

// Sizes chosen to exercise the 4-wide body and every remainder length.
Problem make_problem(Index m, Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Problem p{m, n, Vector(m * n), Vector(m * n), gaussian_vector(m, rng, 0.3),
            gaussian_vector(n, rng, 0.3), Vector(m * n)};
  for (Index k = 0; k < m * n; ++k) {
    p.cost[k] = unit(rng);
    p.xbar[k] = unit(rng) < 0.5 ? 0.0 : 0.1 * unit(rng);
    p.plan[k] = unit(rng) - 0.1;
  }
  return p;
}

const std::pair<Index, Index> kShapes[] = {{1, 1}, {3, 2}, {4, 4}, {5, 3}, {7, 9}, {16, 5}, {33, 17}};

ProxPassInput prox_input(const Problem& p, double sigma, double lambda) {
  ProxPassInput in;
  in.cost = p.cost.data();
  in.xbar = p.xbar.data();
  in.u = p.u.data();
  in.v = p.v.data();
  in.m = p.m;
  in.n = p.n;
  in.sigma = sigma;
  in.lambda = lambda;
  return in;
}

TEST(KernelDispatch, ScalarAlwaysSupported) {
  EXPECT_TRUE(isa_supported(Isa::kScalar));
  EXPECT_TRUE(isa_supported(detect_isa()));
}

TEST(KernelDispatch, GuardRestoresSelection) {
  const Isa before = active_isa();
  {
    IsaGuard guard(Isa::kScalar);
    EXPECT_EQ(active_isa(), Isa::kScalar);
  }
  EXPECT_EQ(active_isa(), before);
}

TEST(KernelDispatch, UnsupportedIsaThrows) {
  if (isa_supported(Isa::kAvx2)) GTEST_SKIP() << "AVX2 present";
  EXPECT_THROW(set_isa(Isa::kAvx2), Error);
}

TEST(KernelEquivalence, ProxPass) {
  require_avx2();
  for (auto [m, n] : kShapes) {
    for (double lambda : {0.0, 1.0}) {
      const Problem p = make_problem(m, n, 11 + m * 100 + n);
      const ProxPassInput in = prox_input(p, 2.5, lambda);
      Vector rs_a(m), cs_a(n), plan_a(m * n), rs_b(m), cs_b(n), plan_b(m * n);
      ProxPassOutput a{rs_a.data(), cs_a.data(), plan_a.data()};
      ProxPassOutput b{rs_b.data(), cs_b.data(), plan_b.data()};
      scalar_table().prox_pass(in, a);
      avx2_table().prox_pass(in, b);
      EXPECT_TRUE(same_bits(plan_a.data(), plan_b.data(), m * n)) << m << "x" << n;
      EXPECT_LE((cs_a - cs_b).norm(), 1e-14 * (1.0 + cs_a.norm()));
      EXPECT_LE((rs_a - rs_b).norm(), 1e-14 * (1.0 + rs_a.norm()));
      EXPECT_EQ(a.support, b.support);
      EXPECT_NEAR(a.phi_sum, b.phi_sum, 1e-12 * (1.0 + std::abs(a.phi_sum)));
      EXPECT_NEAR(a.step_sq, b.step_sq, 1e-12 * (1.0 + a.step_sq));
    }
  }
}

TEST(KernelEquivalence, ProxPassWithoutPlan) {
  require_avx2();
  const Problem p = make_problem(9, 6, 5);
  const ProxPassInput in = prox_input(p, 0.7, 1.0);
  Vector rs_a(9), cs_a(6), rs_b(9), cs_b(6);
  ProxPassOutput a{rs_a.data(), cs_a.data(), nullptr};
  ProxPassOutput b{rs_b.data(), cs_b.data(), nullptr};
  scalar_table().prox_pass(in, a);
  avx2_table().prox_pass(in, b);
  EXPECT_EQ(a.support, b.support);
  EXPECT_LE((cs_a - cs_b).norm(), 1e-14);
}

TEST(KernelEquivalence, ActiveSet) {
  require_avx2();
  for (auto [m, n] : kShapes) {
    const Problem p = make_problem(m, n, 21 + m + n);
    const ProxPassInput in = prox_input(p, 1.3, 1.0);
    ActiveSet a, b;
    scalar_table().active_set(in, a);
    avx2_table().active_set(in, b);
    EXPECT_EQ(a.col_ptr, b.col_ptr);
    EXPECT_EQ(a.row_idx, b.row_idx);
  }
}

TEST(KernelEquivalence, ActiveSetMatchesProxSupport) {
  const Problem p = make_problem(13, 8, 3);
  const ProxPassInput in = prox_input(p, 1.3, 1.0);
  ActiveSet s;
  active_set(in, s);
  Vector rs(13), cs(8);
  ProxPassOutput out{rs.data(), cs.data(), nullptr};
  prox_pass(in, out);
  EXPECT_EQ(s.nnz(), out.support);
}

TEST(KernelEquivalence, KktPass) {
  require_avx2();
  for (auto [m, n] : kShapes) {
    const Problem p = make_problem(m, n, 31 + m * n);
    KktPassInput in{p.plan.data(), p.cost.data(), p.u.data(), p.v.data(), m, n, 0.5};
    Vector rs_a(m), cs_a(n), rs_b(m), cs_b(n);
    KktSums a, b;
    scalar_table().kkt_pass(in, rs_a.data(), cs_a.data(), a);
    avx2_table().kkt_pass(in, rs_b.data(), cs_b.data(), b);
    EXPECT_LE((rs_a - rs_b).norm(), 1e-13);
    EXPECT_LE((cs_a - cs_b).norm(), 1e-13);
    for (auto [x, y] : {std::pair{a.neg_plan_sq, b.neg_plan_sq}, {a.plan_sq, b.plan_sq},
                        {a.neg_z_sq, b.neg_z_sq}, {a.plan_dot_z, b.plan_dot_z},
                        {a.cost_dot_plan, b.cost_dot_plan}, {a.conj_sq, b.conj_sq}}) {
      EXPECT_NEAR(x, y, 1e-12 * (1.0 + std::abs(x)));
    }
  }
}

TEST(KernelEquivalence, AdmmPass) {
  require_avx2();
  for (auto [m, n] : kShapes) {
    for (double lambda : {0.0, 2.0}) {
      const Problem p = make_problem(m, n, 41 + m + 7 * n);
      Vector w_a = p.xbar, x_a = p.plan, w_b = p.xbar, x_b = p.plan;
      Vector wr_a(m), wc_a(n), xr_a(m), xc_a(n), wr_b(m), wc_b(n), xr_b(m), xc_b(n);
      AdmmPassInput in{p.cost.data(), p.u.data(), p.v.data(), m, n, 0.8, lambda, 1.618};
      AdmmPassOutput a{wr_a.data(), wc_a.data(), xr_a.data(), xc_a.data(), 0.0, {}};
      AdmmPassOutput b{wr_b.data(), wc_b.data(), xr_b.data(), xc_b.data(), 0.0, {}};
      scalar_table().admm_pass(in, w_a.data(), x_a.data(), a);
      avx2_table().admm_pass(in, w_b.data(), x_b.data(), b);
      EXPECT_TRUE(same_bits(w_a.data(), w_b.data(), m * n)) << m << "x" << n;
      EXPECT_TRUE(same_bits(x_a.data(), x_b.data(), m * n));
      EXPECT_LE((wr_a - wr_b).norm() + (xr_a - xr_b).norm(), 1e-13);
      EXPECT_LE((wc_a - wc_b).norm() + (xc_a - xc_b).norm(), 1e-13);
      EXPECT_NEAR(a.primal_sq, b.primal_sq, 1e-12 * (1.0 + a.primal_sq));
      EXPECT_NEAR(a.kkt.plan_dot_z, b.kkt.plan_dot_z, 1e-12 * (1.0 + std::abs(a.kkt.plan_dot_z)));
    }
  }
}

TEST(KernelEquivalence, GibbsAndScaling) {
  require_avx2();
  for (auto [m, n] : kShapes) {
    Problem p = make_problem(m, n, 51 + m + n);
    for (Index k = 0; k < m * n; ++k) p.plan[k] = std::abs(p.plan[k]) + 1e-3;
    const Vector v = p.v.array().abs() + 0.5;
    const Vector u = p.u.array().abs() + 0.5;
    Vector xi_a(m * n), xi_b(m * n), rs_a(m), rs_b(m);
    const Index pos_a =
        scalar_table().gibbs_pass(p.cost.data(), p.plan.data(), v.data(), m, n, 1.0, 0.3,
                                  xi_a.data(), rs_a.data());
    const Index pos_b = avx2_table().gibbs_pass(p.cost.data(), p.plan.data(), v.data(), m, n,
                                                1.0, 0.3, xi_b.data(), rs_b.data());
    EXPECT_EQ(pos_a, pos_b);
    EXPECT_TRUE(((xi_a - xi_b).array().abs() <= 1e-14 * xi_a.array().abs()).all())
        << m << "x" << n;
    EXPECT_LE((rs_a - rs_b).norm(), 1e-14 * (1.0 + rs_a.norm()));

    Vector cs_a(n), cs_b(n);
    scalar_table().scaled_col_sum(xi_a.data(), u.data(), m, n, cs_a.data());
    avx2_table().scaled_col_sum(xi_a.data(), u.data(), m, n, cs_b.data());
    EXPECT_LE((cs_a - cs_b).norm(), 1e-14 * (1.0 + cs_a.norm()));

    Vector x_a(m * n), x_b(m * n);
    scalar_table().scale_plan(xi_a.data(), u.data(), v.data(), m, n, x_a.data());
    avx2_table().scale_plan(xi_a.data(), u.data(), v.data(), m, n, x_b.data());
    EXPECT_TRUE(same_bits(x_a.data(), x_b.data(), m * n));
  }
}

TEST(KernelEquivalence, ExpAgreesAcrossRange) {
  require_avx2();
  std::vector<double> xs;
  for (double x = -745.0; x <= 709.0; x += 0.37) xs.push_back(x);
  for (double x : {0.0, -0.0, 1e-300, -1e-300, -708.39, -708.4, 709.0, -800.0, -1e6}) {
    xs.push_back(x);
  }
  std::vector<double> a = xs, b = xs;
  scalar_table().exp_inplace(a.data(), static_cast<Index>(a.size()));
  avx2_table().exp_inplace(b.data(), static_cast<Index>(b.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    // Subnormal results lose relative precision in either variant.
    const double slack = a[i] < std::numeric_limits<double>::min() ? std::numeric_limits<double>::min() : 0.0;
    EXPECT_LE(std::abs(a[i] - b[i]), 1e-14 * a[i] + slack) << xs[i];
  }
}

TEST(KernelExp, CloseToLibm) {
  std::vector<double> xs;
  for (double x = -700.0; x <= 700.0; x += 0.113) xs.push_back(x);
  std::vector<double> ours = xs;
  exp_inplace(ours.data(), static_cast<Index>(ours.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double ref = std::exp(xs[i]);
    ASSERT_NEAR(ours[i], ref, 1e-14 * ref) << xs[i];
  }
}

TEST(KernelExp, UnderflowsToZero) {
  std::vector<double> xs{-800.0, -1e6};
  exp_inplace(xs.data(), 2);
  EXPECT_EQ(xs[0], 0.0);
  EXPECT_EQ(xs[1], 0.0);
}

TEST(KernelScalar, ProxPassMatchesFormula) {
  const Problem p = make_problem(4, 3, 61);
  const double sigma = 1.7;
  const double lambda = 0.5;
  Vector rs(4), cs(3), plan(12);
  ProxPassOutput out{rs.data(), cs.data(), plan.data()};
  scalar_table().prox_pass(prox_input(p, sigma, lambda), out);
  for (Index j = 0; j < 3; ++j) {
    for (Index i = 0; i < 4; ++i) {
      const Index k = i + j * 4;
      const double w = p.xbar[k] + sigma * (p.u[i] + p.v[j]) - sigma * p.cost[k];
      EXPECT_DOUBLE_EQ(plan[k], std::max(w, 0.0) / (1.0 + lambda * sigma));
    }
  }
}

}  // namespace
}  // namespace ripalm::kernels
