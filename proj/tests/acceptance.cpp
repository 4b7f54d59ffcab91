// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Runs the desk-scale solves, so expect a few minutes.

#include <algorithm>
#include <Eigen/Cholesky>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "ripalm/baselines/dadmm.hpp"
#include "ripalm/baselines/ibpgm.hpp"
#include "ripalm/bpdn/bpdn.hpp"
#include "ripalm/cli/pipeline.hpp"
#include "ripalm/core/ripalm.hpp"
#include "ripalm/qrot/instance.hpp"
#include "ripalm/qrot/kkt.hpp"
#include "ripalm/qrot/oracle.hpp"
#include "ripalm/qrot/solve.hpp"

namespace {

using namespace ripalm;

constexpr double kTol = 1e-6;
constexpr int kSeeds = 5;

struct Tally {
  long accepted = 0;
  long violations = 0;
  long converged = 0;
  long uncertified = 0;
  std::string worst_certificate;

  Observer observer() {
    return [this](const RipalmState&, const IterationRecord& rec) {
      ++accepted;
      if (!(rec.lhs <= rec.rhs)) ++violations;
    };
  }

  void certify(const std::string& label, bool solver_converged, double certified_res) {
    if (!solver_converged) return;
    ++converged;
    if (!(certified_res < kTol)) {
      ++uncertified;
      worst_certificate = label;
    }
  }
};

std::map<int, std::pair<bool, std::string>> results;

void report(int id, bool pass, const std::string& detail) {
  results[id] = {pass, detail};
  std::fprintf(stderr, "[done] criterion %d\n", id);
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

Vector gaussian(Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& y) {
  const double h = 1e-6;
  Vector g(y.size());
  Vector probe = y;
  for (Index i = 0; i < y.size(); ++i) {
    probe[i] = y[i] + h;
    const double up = f(probe);
    probe[i] = y[i] - h;
    g[i] = (up - f(probe)) / (2.0 * h);
    probe[i] = y[i];
  }
  return g;
}

// 1, 2, 4, 8.
void qrot_desk_scale(Tally& tally) {
  std::string detail;
  bool ripalm_ok = true;
  bool ripalm_reached = true;
  int dadmm_failures = 0;
  std::string dadmm_detail;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    const qrot::QrotInstance inst = qrot::gaussian_mixture_instance(1000, 1000, seed);
    const cli::QrotRun run = cli::run_qrot_ripalm(inst, cli::QrotRunOptions{}, tally.observer());
    const qrot::QrotSolution& sol = run.solution;
    const int outer = static_cast<int>(sol.report.iterations.size());
    const double certified = qrot::certify(inst, sol.u, sol.v, sol.plan).res;
    const bool converged = sol.report.status == SolveStatus::kConverged;
    tally.certify("qrot ripalm seed " + std::to_string(seed), converged, certified);
    const bool ok = converged && certified < kTol && outer <= 30 &&
                    sol.report.total_inner <= 120 && run.seconds <= 300.0;
    ripalm_ok = ripalm_ok && ok;
    ripalm_reached = ripalm_reached && converged && certified < kTol;
    detail += fmt(" s%d:%d(%d)/%.1e/%.0fs", seed, outer, sol.report.total_inner, certified,
                  run.seconds);

    baselines::AdmmConfig admm;
    admm.max_iter = 10000;
    admm.tol = kTol;
    const baselines::QrotAdmmResult base = baselines::dadmm_qrot(inst, admm);
    const double base_cert = qrot::certify(inst, base.state.u, base.state.v, base.state.x).res;
    tally.certify("qrot dadmm seed " + std::to_string(seed), base.report.converged, base_cert);
    if (!(base_cert < kTol)) ++dadmm_failures;
    dadmm_detail += fmt(" s%d:%.1e/%d", seed, base_cert, base.report.iterations);
  }
  report(1, ripalm_ok, "qrot 1000x1000, outer(ssn)/res/time:" + detail);
  report(2, dadmm_failures >= 3 && ripalm_reached,
         fmt("ripalm reached tol on all: %s; dadmm failed on %d/5 (res/iter):",
             ripalm_reached ? "yes" : "no", dadmm_failures) +
             dadmm_detail);
}

void bpdn_desk_scale(Tally& tally) {
  std::string detail;
  bool ok_all = true;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    const bpdn::SyntheticBpdn data = bpdn::synthetic_instance(1000, 10000, 200, 0.1, seed);
    const cli::BpdnRun run =
        cli::run_bpdn_ripalm(data.instance, cli::BpdnRunOptions{}, tally.observer());
    const bpdn::BpdnSolution& sol = run.solution;
    const int outer = static_cast<int>(sol.report.iterations.size());
    const double certified = bpdn::certify(data.instance, sol.s, sol.t, sol.y).res;
    const bool converged = sol.report.status == SolveStatus::kConverged;
    tally.certify("bpdn ripalm seed " + std::to_string(seed), converged, certified);
    const bool ok = converged && certified < kTol && outer <= 25 &&
                    sol.report.total_inner <= 150 && run.seconds <= 120.0;
    ok_all = ok_all && ok;
    detail += fmt(" s%d:%d(%d)/%.1e/%.0fs", seed, outer, sol.report.total_inner, certified,
                  run.seconds);
  }
  report(3, ok_all, "bpdn (1000,10000,200), outer(ssn)/res/time:" + detail);
}

// Tight reference saddle point from a dense damped Newton method on the smooth
// dual max a'u + b'v - |(u + v' - C)_+|^2 / (2 lambda); shares no code with the solver.
struct Reference {
  Vector y;
  Vector x;
  double res;
};

Reference dense_dual_reference(const qrot::QrotInstance& inst) {
  const Index m = inst.cost.rows();
  const Index n = inst.cost.cols();
  const double lambda = inst.lambda;
  Vector z = Vector::Zero(m + n);
  const auto plan_at = [&](const Vector& p) {
    Matrix plan = (p.head(m).replicate(1, n) + p.tail(n).transpose().replicate(m, 1) - inst.cost) / lambda;
    return Matrix(plan.cwiseMax(0.0));
  };
  const auto dual = [&](const Vector& p) {
    return inst.alpha.dot(p.head(m)) + inst.beta.dot(p.tail(n)) -
           0.5 * lambda * plan_at(p).squaredNorm();
  };
  double res = 1.0;
  for (int it = 0; it < 200; ++it) {
    const Matrix plan = plan_at(z);
    res = qrot::certify(inst, z.head(m), z.tail(n), plan).res;
    if (res < 1e-13) break;
    Vector g(m + n);
    g << inst.alpha - plan.rowwise().sum(), inst.beta - plan.colwise().sum().transpose();
    Matrix h = Matrix::Zero(m + n, m + n);
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < m; ++i) {
        if (plan(i, j) <= 0.0) continue;
        h(i, i) += 1.0 / lambda;
        h(m + j, m + j) += 1.0 / lambda;
        h(i, m + j) += 1.0 / lambda;
        h(m + j, i) += 1.0 / lambda;
      }
    }
    h.diagonal().array() += 1e-12 + std::min(1e-3, g.norm());
    const Vector d = h.ldlt().solve(g);
    const double f0 = dual(z);
    double step = 1.0;
    while (step > 1e-12 && dual(z + step * d) < f0 + 1e-4 * step * g.dot(d)) step *= 0.5;
    z += step * d;
  }
  const Matrix plan = plan_at(z);
  return {z, plan.reshaped(), qrot::certify(inst, z.head(m), z.tail(n), plan).res};
}

void fejer(Tally& tally) {
  const qrot::QrotInstance inst = qrot::gaussian_mixture_instance(50, 50, 1);
  const Reference ref = dense_dual_reference(inst);
  const double ref_res = ref.res;

  const RipalmConfig cfg = default_schedules();
  const double tau = cfg.tau(0);
  std::vector<double> merit;
  const auto measure = [&](const RipalmState& s) {
    merit.push_back((s.x - ref.x).squaredNorm() + (s.w - ref.y).squaredNorm() +
                    tau * (s.y - ref.y).squaredNorm());
  };
  RipalmState start = initial_state(Vector::Zero(100), Vector::Zero(2500));
  measure(start);
  Observer obs = tally.observer();
  SolveReport rep;
  const qrot::QrotOracle oracle(inst);
  const RipalmState last = ripalm_solve(
      oracle, cfg,
      [&](const RipalmState& s) {
        return qrot::kkt_residuals(inst, s.y.head(50), s.y.tail(50), s.x).res;
      },
      std::move(start), rep, [&](const RipalmState& s, const IterationRecord& rec) {
        obs(s, rec);
        measure(s);
      });
  (void)last;
  int increases = 0;
  double worst = 0.0;
  for (std::size_t k = 1; k < merit.size(); ++k) {
    const double rise = (merit[k] - merit[k - 1]) / std::max(merit[k - 1], 1e-300);
    worst = std::max(worst, rise);
    if (rise > 1e-8) ++increases;
  }
  report(5, ref_res < 1e-10 && increases == 0,
         fmt("50x50, reference res %.1e, %zu iterates, %d increases, worst relative rise %.1e",
             ref_res, merit.size(), increases, worst));
}

void gradients() {
  std::mt19937_64 rng(2024);
  double worst_q = 0.0;
  double worst_b = 0.0;
  const qrot::QrotInstance q = qrot::gaussian_mixture_instance(8, 6, 3);
  const bpdn::SyntheticBpdn b = bpdn::synthetic_instance(10, 40, 4, 0.1, 3);
  std::uniform_real_distribution<double> log_sigma(-1.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double sigma = std::pow(10.0, log_sigma(rng));
    const Matrix xbar = gaussian(48, rng, 0.05).cwiseAbs().reshaped(8, 6);
    const Vector ybar = gaussian(14, rng, 0.2);
    const Vector y = gaussian(14, rng, 0.5);
    const auto f = [&](const Vector& p) { return qrot::psi_value(q, p, xbar, ybar, sigma, 5.0); };
    const Vector g = qrot::grad_psi(q, y, xbar, ybar, sigma, 5.0);
    worst_q = std::max(worst_q, (central_difference(f, y) - g).norm() / std::max(1.0, g.norm()));

    const Vector sbar = gaussian(40, rng, 0.5);
    const Vector tbar = gaussian(10, rng, 0.5);
    const Vector ybar_b = gaussian(10, rng, 0.2);
    const Vector yb = gaussian(10, rng, 0.3);
    const auto fb = [&](const Vector& p) {
      return bpdn::phi_value(b.instance, p, sbar, tbar, ybar_b, sigma, 5.0);
    };
    const Vector gb = bpdn::grad_phi(b.instance, yb, sbar, tbar, ybar_b, sigma, 5.0);
    worst_b =
        std::max(worst_b, (central_difference(fb, yb) - gb).norm() / std::max(1.0, gb.norm()));
  }
  report(6, worst_q <= 1e-6 && worst_b <= 1e-6,
         fmt("20 points each, worst relative error qrot %.1e, bpdn %.1e", worst_q, worst_b));
}

void linear_algebra() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<Index> dim10(1, 10);
  std::bernoulli_distribution coin(0.45);
  double worst_a = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index m = dim10(rng);
    const Index n = dim10(rng);
    kernels::ActiveSet omega;
    omega.m = m;
    omega.n = n;
    omega.col_ptr.push_back(0);
    Vector mask(m * n);
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < m; ++i) {
        mask[i + j * m] = coin(rng) ? 1.0 : 0.0;
        if (mask[i + j * m] > 0.0) omega.row_idx.push_back(i);
      }
      omega.col_ptr.push_back(omega.nnz());
    }
    const double scale = 0.1 + 0.05 * trial;
    const double ridge = 1e-3;
    // B maps vec(X) to (X 1; X^T 1).
    Matrix bmat = Matrix::Zero(m + n, m * n);
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < m; ++i) {
        bmat(i, i + j * m) = 1.0;
        bmat(m + j, i + j * m) = 1.0;
      }
    }
    Matrix dense = scale * bmat * mask.asDiagonal() * bmat.transpose();
    dense.diagonal().array() += ridge;
    const qrot::QrotJacobian jac(std::move(omega), scale, ridge);
    const Vector d = gaussian(m + n, rng);
    Vector hd;
    jac.apply(d, hd);
    worst_a = std::max(worst_a, (hd - dense * d).cwiseAbs().maxCoeff());
  }

  std::uniform_int_distribution<Index> dim20(1, 20);
  double worst_b = 0.0;
  int branch_hits[2][2] = {{0, 0}, {0, 0}};
  for (int trial = 0; trial < 50; ++trial) {
    const Index m = dim20(rng);
    const Index n = m + dim20(rng) + 2;
    bpdn::BpdnInstance inst;
    inst.dict = gaussian(m * n, rng).reshaped(m, n);
    inst.b = gaussian(m, rng);
    inst.kappa = 0.5;
    const bool exterior = trial % 2 == 1;
    const bool wide = (trial / 2) % 2 == 0;  // |I| >= m
    const Index active = wide ? std::min(n, m + trial % 3) : m / 2;
    std::vector<Index> cols(static_cast<std::size_t>(n));
    std::iota(cols.begin(), cols.end(), Index{0});
    std::shuffle(cols.begin(), cols.end(), rng);
    bpdn::NewtonSystem sys;
    sys.active.assign(cols.begin(), cols.begin() + active);
    std::sort(sys.active.begin(), sys.active.end());
    sys.sigma = std::pow(10.0, std::uniform_real_distribution<double>(-1.0, 2.0)(rng));
    sys.tau = 5.0;
    sys.kappa = inst.kappa;
    sys.v = gaussian(m, rng);
    sys.v *= (exterior ? 3.0 : 0.4) * inst.kappa / sys.v.norm();
    sys.v_norm = sys.v.norm();
    sys.exterior = exterior;
    ++branch_hits[exterior][m <= active];
    const Vector g = gaussian(m, rng);
    const Vector d = sys.solve(inst, g);
    const Vector ref = sys.dense(inst).llt().solve(-g);
    worst_b = std::max(worst_b, (d - ref).norm());
  }
  const bool all_branches =
      branch_hits[0][0] > 0 && branch_hits[0][1] > 0 && branch_hits[1][0] > 0 && branch_hits[1][1] > 0;
  report(7, worst_a <= 1e-12 && worst_b <= 1e-8 && all_branches,
         fmt("(a) 50 masks, max abs diff %.1e; (b) 50 systems over all 4 branches, max |dd| %.1e",
             worst_a, worst_b));
}

void sinkhorn() {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<Index> dim(2, 60);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  double worst = 0.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    const Index m = dim(rng);
    const Index n = dim(rng);
    Matrix xi(m, n);
    for (Index k = 0; k < m * n; ++k) xi.data()[k] = unit(rng);
    Vector alpha(m), beta(n);
    for (Index i = 0; i < m; ++i) alpha[i] = unit(rng);
    for (Index j = 0; j < n; ++j) beta[j] = unit(rng);
    alpha /= alpha.sum();
    beta /= beta.sum();
    Vector v(n);
    for (Index j = 0; j < n; ++j) v[j] = unit(rng);
    const Vector u = baselines::sinkhorn_row_update(xi, v, alpha);
    const Vector rows = (u.asDiagonal() * xi * v.asDiagonal()).rowwise().sum();
    worst = std::max(worst, ((rows - alpha).array().abs() / alpha.array()).maxCoeff());
    v = baselines::sinkhorn_col_update(xi, u, beta);
    const Vector cols = (u.asDiagonal() * xi * v.asDiagonal()).colwise().sum().transpose();
    worst = std::max(worst, ((cols - beta).array().abs() / beta.array()).maxCoeff());
  }
  // Each marginal entry is a sum of up to 60 rounded products.
  const double bound = 128.0 * std::numeric_limits<double>::epsilon();
  report(9, worst <= bound,
         fmt("100 sweeps, worst relative marginal error %.1e (bound %.1e)", worst, bound));
}

void parameter_guard() {
  RipalmConfig cfg = default_schedules();
  const bool quiet_default = parameter_warnings(cfg).empty();
  cfg.tau = constant_schedule(3.0);
  const bool warns_small = parameter_warnings(cfg).size() == 1;
  cfg.tau = constant_schedule(4.0 * 0.99);
  const bool warns_boundary = parameter_warnings(cfg).size() == 1;
  report(10, quiet_default && warns_small && warns_boundary,
         fmt("tau=5 rho=.99 quiet: %s; tau=3 warns: %s; tau=4 rho boundary warns: %s",
             quiet_default ? "yes" : "no", warns_small ? "yes" : "no",
             warns_boundary ? "yes" : "no"));
}

}  // namespace

int main() {
  Tally tally;
  gradients();
  linear_algebra();
  sinkhorn();
  parameter_guard();
  fejer(tally);
  bpdn_desk_scale(tally);
  qrot_desk_scale(tally);
  report(4, tally.violations == 0,
         fmt("%ld accepted outer iterates, %ld violations", tally.accepted, tally.violations));
  report(8, tally.uncertified == 0,
         fmt("%ld converged solutions, %ld failed independent certification%s", tally.converged,
             tally.uncertified,
             tally.worst_certificate.empty() ? "" : (" (" + tally.worst_certificate + ")").c_str()));
  int failures = 0;
  for (const auto& [id, line] : results) {
    if (!line.first) ++failures;
    std::printf("criterion %2d: %s  %s\n", id, line.first ? "PASS" : "FAIL", line.second.c_str());
  }
  std::printf("%d of %zu criteria failed\n", failures, results.size());
  return failures == 0 ? 0 : 1;
}
