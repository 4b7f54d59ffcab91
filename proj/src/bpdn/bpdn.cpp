#include "ripalm/bpdn/bpdn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include "ripalm/error.hpp"
#include "ripalm/numerics/linsolve.hpp"

namespace ripalm::bpdn {

void validate(const BpdnInstance& inst) {
  if (inst.m() < 1 || inst.n() < 1) throw InputError("dictionary is empty");
  if (inst.b.size() != inst.m()) {
    std::ostringstream msg;
    msg << "b has length " << inst.b.size() << ", dictionary has " << inst.m() << " rows";
    throw InputError(msg.str());
  }
  if (!inst.dict.allFinite() || !inst.b.allFinite()) throw InputError("non-finite BPDN data");
  if (!(inst.kappa > 0.0) || !std::isfinite(inst.kappa)) {
    throw InputError("kappa must be positive and finite");
  }
}

Vector prox_l1(const Vector& u, double sigma) {
  return u.unaryExpr([sigma](double x) {
    const double mag = std::abs(x) - sigma;
    return mag > 0.0 ? std::copysign(mag, x) : 0.0;
  });
}

Vector proj_l2ball(const Vector& v, double kappa) {
  const double norm = v.norm();
  if (norm <= kappa) return v;
  return (kappa / norm) * v;
}

SyntheticBpdn synthetic_instance(Index m, Index n, Index sparsity, double delta,
                                 std::uint64_t seed) {
  if (m < 1 || n < 1) throw InputError("synthetic BPDN needs m, n >= 1");
  if (sparsity < 0 || sparsity > n) {
    std::ostringstream msg;
    msg << "sparsity " << sparsity << " must lie in [0, n = " << n << "]";
    throw InputError(msg.str());
  }
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw InputError("delta must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  SyntheticBpdn out;
  BpdnInstance& inst = out.instance;
  inst.dict.resize(m, n);
  for (Index k = 0; k < m * n; ++k) inst.dict.data()[k] = normal(rng);

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  for (Index k = 0; k < sparsity; ++k) {
    std::uniform_int_distribution<Index> pick(k, n - 1);
    std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(pick(rng))]);
  }
  out.signal = Vector::Zero(n);
  for (Index k = 0; k < sparsity; ++k) {
    double value = normal(rng);
    while (value == 0.0) value = normal(rng);
    out.signal[order[static_cast<std::size_t>(k)]] = value;
  }

  Vector zeta(m);
  for (Index i = 0; i < m; ++i) zeta[i] = normal(rng);
  inst.b = inst.dict * out.signal + delta * zeta;
  inst.kappa = std::max(delta * zeta.norm(), kMinKappa);
  return out;
}

namespace {

Matrix gather_columns(const Matrix& dict, const std::vector<Index>& cols) {
  Matrix g(dict.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) g.col(static_cast<Index>(k)) = dict.col(cols[k]);
  return g;
}

Matrix gram_outer(const Matrix& g) {
  Matrix out = Matrix::Zero(g.rows(), g.rows());
  out.selfadjointView<Eigen::Lower>().rankUpdate(g);
  out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
  return out;
}

Matrix gram_inner(const Matrix& g) {
  Matrix out = Matrix::Zero(g.cols(), g.cols());
  out.selfadjointView<Eigen::Lower>().rankUpdate(g.transpose());
  out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
  return out;
}

}  // namespace

void NewtonSystem::apply(const BpdnInstance& inst, const Vector& d, Vector& out) const {
  Vector low_rank = Vector::Zero(d.size());
  for (Index col : active) {
    const auto column = inst.dict.col(col);
    low_rank.noalias() += column.dot(d) * column;
  }
  Vector vd = d;
  if (exterior) {
    vd = (kappa / v_norm) * (d - (v.dot(d) / (v_norm * v_norm)) * v);
  }
  out = sigma * (low_rank + vd) + (tau / sigma) * d;
}

Matrix NewtonSystem::dense(const BpdnInstance& inst) const {
  const Index m = inst.m();
  Matrix h = gram_outer(gather_columns(inst.dict, active));
  if (exterior) {
    h += (kappa / v_norm) * (Matrix::Identity(m, m) - v * v.transpose() / (v_norm * v_norm));
  } else {
    h += Matrix::Identity(m, m);
  }
  h *= sigma;
  h.diagonal().array() += tau / sigma;
  return h;
}

Vector NewtonSystem::solve(const BpdnInstance& inst, const Vector& g) const {
  const Index m = inst.m();
  const auto k = static_cast<Index>(active.size());
  const Matrix cols = gather_columns(inst.dict, active);
  const double shift = tau / (sigma * sigma);

  // Each branch yields a solver for the scaled system (H / sigma) d = r.
  std::function<Vector(const Vector&)> scaled_solve;
  std::unique_ptr<CholeskyFactor> factor;
  if (!exterior) {
    const double gamma = 1.0 + shift;
    if (m <= k) {
      Matrix sys = gram_outer(cols);
      sys.diagonal().array() += gamma;
      factor = std::make_unique<CholeskyFactor>(sys);
      scaled_solve = [&](const Vector& r) { return factor->solve(r); };
    } else if (k == 0) {
      scaled_solve = [gamma](const Vector& r) { return Vector(r / gamma); };
    } else {
      Matrix small = gram_inner(cols);
      small.diagonal().array() += gamma;
      factor = std::make_unique<CholeskyFactor>(small);
      scaled_solve = [&, gamma](const Vector& r) {
        const Vector inner = factor->solve(cols.transpose() * r);
        return Vector((r - cols * inner) / gamma);
      };
    }
  } else {
    const double ratio = kappa / v_norm;
    const double a = ratio + shift;
    const double c = kappa / (v_norm * v_norm * v_norm);
    const double alpha_bar = 1.0 - ratio / a;
    const double rank_one = c / (alpha_bar * a * a);
    if (m <= k) {
      Matrix sys = gram_outer(cols);
      sys.diagonal().array() += a;
      sys.noalias() -= c * v * v.transpose();
      factor = std::make_unique<CholeskyFactor>(sys);
      scaled_solve = [&](const Vector& r) { return factor->solve(r); };
    } else {
      // B^{-1} x = x / a + rank_one v (v^T x)
      auto b_inv = [this, a, rank_one](const Vector& x) {
        return Vector(x / a + (rank_one * v.dot(x)) * v);
      };
      if (k == 0) {
        scaled_solve = b_inv;
      } else {
        auto b_inv_cols = std::make_shared<Matrix>(cols / a);
        b_inv_cols->noalias() += (rank_one * v) * (v.transpose() * cols);
        Matrix small = cols.transpose() * *b_inv_cols;
        small = 0.5 * (small + small.transpose()).eval();
        small.diagonal().array() += 1.0;
        factor = std::make_unique<CholeskyFactor>(small);
        scaled_solve = [&, b_inv, b_inv_cols](const Vector& r) {
          const Vector y = b_inv(r);
          const Vector inner = factor->solve(cols.transpose() * y);
          return Vector(y - *b_inv_cols * inner);
        };
      }
    }
  }

  const Vector rhs = -g / sigma;
  Vector d = scaled_solve(rhs);
  const double target = 1e-12 * std::max(1.0, g.norm());
  Vector hd;
  for (int sweep = 0; sweep < 2; ++sweep) {
    apply(inst, d, hd);
    const Vector r = -(hd + g);
    if (r.norm() <= target) break;
    d += scaled_solve(r / sigma);
  }
  return d;
}

NewtonSystem assemble_newton_system(const BpdnInstance& inst, const Vector& y,
                                    const Vector& sbar, const Vector& tbar, double sigma,
                                    double tau) {
  NewtonSystem sys;
  sys.sigma = sigma;
  sys.tau = tau;
  sys.kappa = inst.kappa;
  const Vector u = sbar + sigma * (inst.dict.transpose() * y);
  for (Index i = 0; i < u.size(); ++i) {
    if (std::abs(u[i]) > sigma) sys.active.push_back(i);
  }
  sys.v = tbar - sigma * y;
  sys.v_norm = sys.v.norm();
  sys.exterior = sys.v_norm > inst.kappa;
  return sys;
}

BpdnSubproblem::BpdnSubproblem(const BpdnInstance& inst, const Vector& xbar, const Vector& ybar,
                               double sigma, double tau)
    : inst_(inst),
      sbar_(xbar.head(inst.n())),
      tbar_(xbar.tail(inst.m())),
      ybar_(ybar),
      sigma_(sigma),
      tau_(tau),
      xbar_sq_(xbar.squaredNorm()) {}

void BpdnSubproblem::evaluate(const Vector& y) {
  if (cached_y_.size() == y.size() && cached_y_ == y) return;
  const Vector u = sbar_ + sigma_ * (inst_.dict.transpose() * y);
  const Vector p = prox_l1(u, sigma_);
  const Vector v = tbar_ - sigma_ * y;
  const Vector q = proj_l2ball(v, inst_.kappa);
  const Vector shift = y - ybar_;
  const double inv_two_sigma = 0.5 / sigma_;
  const double s_term = (p.array() * (2.0 * u - p).array()).sum() * inv_two_sigma - p.lpNorm<1>();
  const double t_term = q.dot(2.0 * v - q) * inv_two_sigma;
  cached_value_ = -inst_.b.dot(y) + s_term + t_term - xbar_sq_ * inv_two_sigma +
                  0.5 * (tau_ / sigma_) * shift.squaredNorm();
  cached_grad_ = inst_.dict * p - q - inst_.b + (tau_ / sigma_) * shift;
  cached_step_sq_ = (p - sbar_).squaredNorm() + (q - tbar_).squaredNorm();
  cached_y_ = y;
}

double BpdnSubproblem::value(const Vector& y) {
  evaluate(y);
  return cached_value_;
}

void BpdnSubproblem::gradient(const Vector& y, Vector& g) {
  evaluate(y);
  g = cached_grad_;
}

double BpdnSubproblem::primal_step_sq(const Vector& y) {
  evaluate(y);
  return cached_step_sq_;
}

const NewtonSystem& BpdnSubproblem::system_at(const Vector& y) {
  if (!sys_ || sys_y_.size() != y.size() || sys_y_ != y) {
    sys_ = std::make_unique<NewtonSystem>(
        assemble_newton_system(inst_, y, sbar_, tbar_, sigma_, tau_));
    sys_y_ = y;
  }
  return *sys_;
}

Vector BpdnSubproblem::newton_direction(const Vector& y, const Vector& g, double) {
  return system_at(y).solve(inst_, g);
}

void BpdnSubproblem::jacobian_apply(const Vector& y, const Vector& d, Vector& out) {
  system_at(y).apply(inst_, d, out);
}

void BpdnOracle::apply_A(const Vector& x, Vector& out) const {
  out = inst_.dict * x.head(inst_.n()) - x.tail(inst_.m());
}

void BpdnOracle::apply_At(const Vector& y, Vector& out) const {
  out.resize(primal_dim());
  out.head(inst_.n()) = inst_.dict.transpose() * y;
  out.tail(inst_.m()) = -y;
}

void BpdnOracle::prox(const Vector& point, double sigma, Vector& out) const {
  out.resize(primal_dim());
  out.head(inst_.n()) = prox_l1(point.head(inst_.n()), sigma);
  out.tail(inst_.m()) = proj_l2ball(point.tail(inst_.m()), inst_.kappa);
}

std::unique_ptr<Subproblem> BpdnOracle::make_subproblem(const Vector& xbar, const Vector& ybar,
                                                        double sigma, double tau) const {
  return std::make_unique<BpdnSubproblem>(inst_, xbar, ybar, sigma, tau);
}

double phi_value(const BpdnInstance& inst, const Vector& y, const Vector& sbar,
                 const Vector& tbar, const Vector& ybar, double sigma, double tau) {
  Vector xbar(inst.n() + inst.m());
  xbar << sbar, tbar;
  BpdnSubproblem sub(inst, xbar, ybar, sigma, tau);
  return sub.value(y);
}

Vector grad_phi(const BpdnInstance& inst, const Vector& y, const Vector& sbar,
                const Vector& tbar, const Vector& ybar, double sigma, double tau) {
  Vector xbar(inst.n() + inst.m());
  xbar << sbar, tbar;
  BpdnSubproblem sub(inst, xbar, ybar, sigma, tau);
  Vector g;
  sub.gradient(y, g);
  return g;
}

namespace {

BpdnResiduals finish(double primal, double dual_sq, double denom_dual, double pobj,
                     double dobj) {
  BpdnResiduals r;
  r.primal = primal;
  r.dual = std::sqrt(dual_sq) / denom_dual;
  r.pobj = pobj;
  r.dobj = dobj;
  r.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
  r.res = std::max({r.primal, r.dual, r.gap});
  return r;
}

}  // namespace

BpdnResiduals kkt_residuals(const BpdnInstance& inst, const Vector& s, const Vector& t,
                            const Vector& y, double dict_norm) {
  if (dict_norm < 0.0) dict_norm = inst.dict.norm();
  const double primal = (inst.dict * s - inst.b - t).norm() / (1.0 + inst.b.norm());
  const Vector dty = inst.dict.transpose() * y;
  const double dual_sq = (s - prox_l1(s + dty, 1.0)).squaredNorm() +
                         (t - proj_l2ball(t - y, inst.kappa)).squaredNorm();
  return finish(primal, dual_sq, 1.0 + dict_norm, s.lpNorm<1>(),
                -inst.kappa * y.norm() + inst.b.dot(y));
}

BpdnResiduals certify(const BpdnInstance& inst, const Vector& s, const Vector& t,
                      const Vector& y) {
  const Index m = inst.m();
  const Index n = inst.n();
  double dict_sq = 0.0;
  double primal_sq = 0.0;
  double b_sq = 0.0;
  double y_sq = 0.0;
  double by = 0.0;
  for (Index i = 0; i < m; ++i) {
    double ds = 0.0;
    for (Index j = 0; j < n; ++j) {
      ds += inst.dict(i, j) * s[j];
      dict_sq += inst.dict(i, j) * inst.dict(i, j);
    }
    const double r = ds - inst.b[i] - t[i];
    primal_sq += r * r;
    b_sq += inst.b[i] * inst.b[i];
    y_sq += y[i] * y[i];
    by += inst.b[i] * y[i];
  }
  double dual_sq = 0.0;
  double l1 = 0.0;
  for (Index j = 0; j < n; ++j) {
    double dty = 0.0;
    for (Index i = 0; i < m; ++i) dty += inst.dict(i, j) * y[i];
    const double point = s[j] + dty;
    const double shrunk = point > 1.0 ? point - 1.0 : (point < -1.0 ? point + 1.0 : 0.0);
    dual_sq += (s[j] - shrunk) * (s[j] - shrunk);
    l1 += std::abs(s[j]);
  }
  double ball_sq = 0.0;
  for (Index i = 0; i < m; ++i) ball_sq += (t[i] - y[i]) * (t[i] - y[i]);
  const double ball_norm = std::sqrt(ball_sq);
  const double scale = ball_norm > inst.kappa ? inst.kappa / ball_norm : 1.0;
  for (Index i = 0; i < m; ++i) {
    const double diff = t[i] - scale * (t[i] - y[i]);
    dual_sq += diff * diff;
  }
  return finish(std::sqrt(primal_sq) / (1.0 + std::sqrt(b_sq)), dual_sq,
                1.0 + std::sqrt(dict_sq), l1, -inst.kappa * std::sqrt(y_sq) + by);
}

FeasNobj feas_nobj(const BpdnInstance& inst, const Vector& s, const Vector& s_ref) {
  FeasNobj out;
  out.feas = std::max((inst.dict * s - inst.b).norm() - inst.kappa, 0.0) / (1.0 + inst.b.norm());
  const double ref = s_ref.lpNorm<1>();
  out.nobj = std::abs(s.lpNorm<1>() - ref) / (1.0 + ref);
  return out;
}

BpdnSolution solve_ripalm(const BpdnInstance& inst, const RipalmConfig& cfg, const Vector& y0,
                          const Vector& s0, const Vector& t0, const Observer& observer) {
  validate(inst);
  const Index m = inst.m();
  const Index n = inst.n();
  const BpdnOracle oracle(inst);
  const double dict_norm = inst.dict.norm();
  Vector x0(n + m);
  x0 << s0, t0;

  BpdnSolution out;
  out.state = ripalm_solve(
      oracle, cfg,
      [&](const RipalmState& st) {
        return kkt_residuals(inst, st.x.head(n), st.x.tail(m), st.y, dict_norm).res;
      },
      initial_state(y0, std::move(x0)), out.report, observer);
  out.s = out.state.x.head(n);
  out.t = out.state.x.tail(m);
  out.y = out.state.y;
  out.residuals = kkt_residuals(inst, out.s, out.t, out.y, dict_norm);
  return out;
}

BpdnSolution solve_ripalm(const BpdnInstance& inst, const RipalmConfig& cfg,
                          const Observer& observer) {
  return solve_ripalm(inst, cfg, Vector::Zero(inst.m()), Vector::Zero(inst.n()),
                      Vector::Zero(inst.m()), observer);
}

}  // namespace ripalm::bpdn
