#include "ripalm/qrot/oracle.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "ripalm/error.hpp"
#include "ripalm/numerics/linsolve.hpp"

namespace ripalm::qrot {

namespace {

kernels::ProxPassInput pass_input(const QrotInstance& inst, const double* xbar, const Vector& y,
                                  double sigma) {
  kernels::ProxPassInput in;
  in.cost = inst.cost.data();
  in.xbar = xbar;
  in.u = y.data();
  in.v = y.data() + inst.m();
  in.m = inst.m();
  in.n = inst.n();
  in.sigma = sigma;
  in.lambda = inst.lambda;
  return in;
}

// Compressed-column structure of the transpose.
kernels::ActiveSet transpose(const kernels::ActiveSet& a) {
  kernels::ActiveSet t;
  t.m = a.n;
  t.n = a.m;
  t.col_ptr.assign(a.m + 1, 0);
  for (Index idx : a.row_idx) ++t.col_ptr[idx + 1];
  for (Index i = 0; i < a.m; ++i) t.col_ptr[i + 1] += t.col_ptr[i];
  t.row_idx.resize(a.row_idx.size());
  std::vector<Index> next(t.col_ptr.begin(), t.col_ptr.end() - 1);
  for (Index j = 0; j < a.n; ++j) {
    for (Index p = a.col_ptr[j]; p < a.col_ptr[j + 1]; ++p) {
      t.row_idx[next[a.row_idx[p]]++] = j;
    }
  }
  return t;
}

// Block system [diag(a), s K; s K^T, diag(e)] [x; z] = [p; q] with K given by
// its compressed columns. z is eliminated, leaving the Schur complement
//   S = diag(a) - s^2 K diag(1/e) K^T
// on the x block, which is factored once and reused.
class SchurSolver {
 public:
  SchurSolver(const kernels::ActiveSet& k, Vector a, Vector e, double s)
      : k_(k), a_(std::move(a)), e_(std::move(e)), s_(s), factor_(assemble()) {}

  void solve(const Vector& p, const Vector& q, Vector& x, Vector& z) const {
    // x: S x = p - s K (q / e)
    Vector rhs = p;
    for (Index j = 0; j < k_.n; ++j) {
      const double qj = s_ * q[j] / e_[j];
      for (Index idx = k_.col_ptr[j]; idx < k_.col_ptr[j + 1]; ++idx) rhs[k_.row_idx[idx]] -= qj;
    }
    x = factor_.solve(rhs);
    z.resize(k_.n);
    for (Index j = 0; j < k_.n; ++j) {
      double acc = 0.0;
      for (Index idx = k_.col_ptr[j]; idx < k_.col_ptr[j + 1]; ++idx) acc += x[k_.row_idx[idx]];
      z[j] = (q[j] - s_ * acc) / e_[j];
    }
  }

 private:
  Matrix assemble() const {
    const Index rows = k_.m;
    const Index cols = k_.n;
    const double s2 = s_ * s_;
    double pair_work = 0.0;
    for (Index j = 0; j < cols; ++j) {
      const double nnz = static_cast<double>(k_.col_ptr[j + 1] - k_.col_ptr[j]);
      pair_work += nnz * nnz;
    }
    Matrix s_mat = Matrix::Zero(rows, rows);
    const double dense_work = 0.25 * static_cast<double>(rows) * static_cast<double>(rows) *
                              static_cast<double>(cols);
    if (pair_work <= dense_work) {
      for (Index j = 0; j < cols; ++j) {
        const double w = s2 / e_[j];
        const Index begin = k_.col_ptr[j];
        const Index end = k_.col_ptr[j + 1];
        for (Index p = begin; p < end; ++p) {
          const Index ip = k_.row_idx[p];
          for (Index q = begin; q <= p; ++q) s_mat(ip, k_.row_idx[q]) -= w;
        }
      }
    } else {
      Matrix scaled = Matrix::Zero(rows, cols);
      for (Index j = 0; j < cols; ++j) {
        const double w = s_ / std::sqrt(e_[j]);
        for (Index p = k_.col_ptr[j]; p < k_.col_ptr[j + 1]; ++p) scaled(k_.row_idx[p], j) = w;
      }
      s_mat.selfadjointView<Eigen::Lower>().rankUpdate(scaled, -1.0);
    }
    s_mat.diagonal() += a_;
    s_mat.triangularView<Eigen::StrictlyUpper>() = s_mat.transpose();
    return s_mat;
  }

  const kernels::ActiveSet& k_;
  Vector a_;
  Vector e_;
  double s_;
  CholeskyFactor factor_;
};

}  // namespace

QrotJacobian::QrotJacobian(kernels::ActiveSet omega, double scale, double ridge)
    : omega_(std::move(omega)), scale_(scale), ridge_(ridge) {
  row_count_ = Vector::Zero(omega_.m);
  col_count_.resize(omega_.n);
  for (Index j = 0; j < omega_.n; ++j) {
    col_count_[j] = static_cast<double>(omega_.col_ptr[j + 1] - omega_.col_ptr[j]);
    for (Index p = omega_.col_ptr[j]; p < omega_.col_ptr[j + 1]; ++p) {
      row_count_[omega_.row_idx[p]] += 1.0;
    }
  }
}

void QrotJacobian::apply(const Vector& d, Vector& out) const {
  const Index m = omega_.m;
  const Index n = omega_.n;
  const double* du = d.data();
  const double* dv = d.data() + m;
  Vector cross = Vector::Zero(m + n);
  for (Index j = 0; j < n; ++j) {
    double acc = 0.0;
    for (Index p = omega_.col_ptr[j]; p < omega_.col_ptr[j + 1]; ++p) {
      const Index i = omega_.row_idx[p];
      cross[i] += dv[j];
      acc += du[i];
    }
    cross[m + j] = acc;
  }
  out.resize(m + n);
  for (Index i = 0; i < m; ++i) out[i] = scale_ * (row_count_[i] * du[i] + cross[i]) + ridge_ * du[i];
  for (Index j = 0; j < n; ++j) {
    out[m + j] = scale_ * (cross[m + j] + col_count_[j] * dv[j]) + ridge_ * dv[j];
  }
}

Vector QrotJacobian::diagonal() const {
  Vector diag(dim());
  diag << scale_ * row_count_.array() + ridge_, scale_ * col_count_.array() + ridge_;
  return diag;
}

Matrix QrotJacobian::dense() const {
  const Index m = omega_.m;
  Matrix h = Matrix::Zero(dim(), dim());
  h.diagonal() = diagonal();
  for (Index j = 0; j < omega_.n; ++j) {
    for (Index p = omega_.col_ptr[j]; p < omega_.col_ptr[j + 1]; ++p) {
      const Index i = omega_.row_idx[p];
      h(i, m + j) = scale_;
      h(m + j, i) = scale_;
    }
  }
  return h;
}

Vector QrotJacobian::solve_direct(const Vector& rhs) const {
  const Index m = omega_.m;
  const Index n = omega_.n;
  Vector a = scale_ * row_count_.array() + ridge_;
  Vector e = scale_ * col_count_.array() + ridge_;
  Vector x, z;
  Vector out(m + n);
  if (m <= n) {
    SchurSolver solver(omega_, std::move(a), std::move(e), scale_);
    solver.solve(rhs.head(m), rhs.tail(n), x, z);
    out << x, z;
  } else {
    const kernels::ActiveSet omega_t = transpose(omega_);
    SchurSolver solver(omega_t, std::move(e), std::move(a), scale_);
    solver.solve(rhs.tail(n), rhs.head(m), x, z);
    out << z, x;
  }
  return out;
}

Vector QrotJacobian::solve(const Vector& g, double tol) const {
  const Vector rhs = -g;
  Vector hd(dim());
  if (dim() <= kDirectSolveMaxDim) {
    Vector d = solve_direct(rhs);
    apply(d, hd);
    Vector r = rhs - hd;
    // A few refinement sweeps absorb the rounding of the factorization.
    for (int sweep = 0; sweep < 3 && r.norm() > tol; ++sweep) {
      d += solve_direct(r);
      apply(d, hd);
      r = rhs - hd;
    }
    if (r.norm() <= tol) return d;
    const LinearOperator op = [this](const Vector& in, Vector& out) { apply(in, out); };
    return pcg_solve(op, rhs, tol, static_cast<int>(dim()),
                     diagonal_preconditioner(diagonal()), &d)
        .x;
  }
  const LinearOperator op = [this](const Vector& in, Vector& out) { apply(in, out); };
  const int maxit = static_cast<int>(std::max<Index>(200, 2 * dim()));
  return pcg_solve(op, rhs, tol, maxit, diagonal_preconditioner(diagonal())).x;
}

QrotJacobian build_jacobian(const QrotInstance& inst, const Vector& y, const double* xbar,
                            double sigma, double tau) {
  kernels::ActiveSet omega;
  kernels::active_set(pass_input(inst, xbar, y, sigma), omega);
  return QrotJacobian(std::move(omega), sigma / (1.0 + inst.lambda * sigma), tau / sigma);
}

QrotJacobian build_jacobian(const QrotInstance& inst, const Vector& y, const Matrix& xbar,
                            double sigma, double tau) {
  return build_jacobian(inst, y, xbar.data(), sigma, tau);
}

QrotSubproblem::QrotSubproblem(const QrotInstance& inst, const double* xbar, const Vector& ybar,
                               double sigma, double tau)
    : inst_(inst), xbar_(xbar), ybar_(ybar), sigma_(sigma), tau_(tau) {
  xbar_sq_ = ConstVectorMap(xbar, inst.m() * inst.n()).squaredNorm();
  row_sum_.resize(inst.m());
  col_sum_.resize(inst.n());
  cached_grad_.resize(inst.m() + inst.n());
}

void QrotSubproblem::evaluate(const Vector& y) {
  if (cached_y_.size() == y.size() && cached_y_ == y) return;
  const Index m = inst_.m();
  const Index n = inst_.n();
  kernels::ProxPassOutput out;
  out.row_sum = row_sum_.data();
  out.col_sum = col_sum_.data();
  kernels::prox_pass(pass_input(inst_, xbar_, y, sigma_), out);

  const double ridge = tau_ / sigma_;
  const Vector shift = y - ybar_;
  cached_value_ = -inst_.alpha.dot(y.head(m)) - inst_.beta.dot(y.tail(n)) + out.phi_sum -
                  xbar_sq_ / (2.0 * sigma_) + 0.5 * ridge * shift.squaredNorm();
  cached_grad_.head(m) = row_sum_ - inst_.alpha + ridge * shift.head(m);
  cached_grad_.tail(n) = col_sum_ - inst_.beta + ridge * shift.tail(n);
  cached_step_sq_ = out.step_sq;
  cached_y_ = y;
}

double QrotSubproblem::value(const Vector& y) {
  evaluate(y);
  return cached_value_;
}

void QrotSubproblem::gradient(const Vector& y, Vector& g) {
  evaluate(y);
  g = cached_grad_;
}

double QrotSubproblem::primal_step_sq(const Vector& y) {
  evaluate(y);
  return cached_step_sq_;
}

const QrotJacobian& QrotSubproblem::jacobian_at(const Vector& y) {
  if (!jac_ || jac_y_.size() != y.size() || jac_y_ != y) {
    jac_ = std::make_unique<QrotJacobian>(build_jacobian(inst_, y, xbar_, sigma_, tau_));
    jac_y_ = y;
  }
  return *jac_;
}

Vector QrotSubproblem::newton_direction(const Vector& y, const Vector& g, double tol) {
  const QrotJacobian& jac = jacobian_at(y);
  Vector d = jac.solve(g, tol);
  Vector hd;
  jac.apply(d, hd);
  last_residual_ = (hd + g).norm();
  return d;
}

void QrotSubproblem::jacobian_apply(const Vector& y, const Vector& d, Vector& out) {
  jacobian_at(y).apply(d, out);
}

void QrotOracle::apply_A(const Vector& x, Vector& out) const {
  const ConstMatrixMap plan(x.data(), inst_.m(), inst_.n());
  out.resize(dual_dim());
  out.head(inst_.m()) = plan.rowwise().sum();
  out.tail(inst_.n()) = plan.colwise().sum().transpose();
}

void QrotOracle::apply_At(const Vector& y, Vector& out) const {
  const Index m = inst_.m();
  const Index n = inst_.n();
  out.resize(m * n);
  MatrixMap z(out.data(), m, n);
  z = y.head(m).replicate(1, n) + y.tail(n).transpose().replicate(m, 1);
}

void QrotOracle::prox(const Vector& point, double sigma, Vector& out) const {
  const ConstMatrixMap z(point.data(), inst_.m(), inst_.n());
  out.resize(primal_dim());
  MatrixMap(out.data(), inst_.m(), inst_.n()) = prox_fq(z, sigma, inst_);
}

void QrotOracle::prox_step(const Vector& xbar, const Vector& y, double sigma, Vector& out) const {
  Vector row(inst_.m());
  Vector col(inst_.n());
  out.resize(primal_dim());
  kernels::ProxPassOutput res;
  res.row_sum = row.data();
  res.col_sum = col.data();
  res.plan = out.data();
  kernels::prox_pass(pass_input(inst_, xbar.data(), y, sigma), res);
}

std::unique_ptr<Subproblem> QrotOracle::make_subproblem(const Vector& xbar, const Vector& ybar,
                                                        double sigma, double tau) const {
  return std::make_unique<QrotSubproblem>(inst_, xbar.data(), ybar, sigma, tau);
}

double psi_value(const QrotInstance& inst, const Vector& y, const Matrix& xbar,
                 const Vector& ybar, double sigma, double tau) {
  QrotSubproblem sub(inst, xbar.data(), ybar, sigma, tau);
  return sub.value(y);
}

Vector grad_psi(const QrotInstance& inst, const Vector& y, const Matrix& xbar,
                const Vector& ybar, double sigma, double tau) {
  QrotSubproblem sub(inst, xbar.data(), ybar, sigma, tau);
  Vector g;
  sub.gradient(y, g);
  return g;
}

}  // namespace ripalm::qrot
