#include "ripalm/numerics/linsolve.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "ripalm/error.hpp"

namespace ripalm {

CholeskyFactor::CholeskyFactor(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw NotSpd("cholesky: matrix is not square");
  }
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= 1e-12 * scale)) {
    std::ostringstream msg;
    msg << "cholesky: matrix not symmetric (max |A - A^T| = " << asym << ")";
    throw NotSpd(msg.str());
  }
  llt_.compute(a);
  if (llt_.info() != Eigen::Success) {
    throw NotSpd("cholesky: non-positive pivot");
  }
  // Eigen only reports failure for pivots <= 0; tiny positive pivots pass.
  const auto diag = llt_.matrixLLT().diagonal();
  if (!(diag.minCoeff() > 0.0) || !diag.allFinite()) {
    throw NotSpd("cholesky: non-positive pivot");
  }
}

Vector CholeskyFactor::solve(const Vector& rhs) const { return llt_.solve(rhs); }

Vector cholesky_solve(const Matrix& a, const Vector& rhs) { return CholeskyFactor(a).solve(rhs); }

PcgResult pcg_solve(const LinearOperator& matvec, const Vector& rhs, double tol, int maxit,
                    const std::optional<LinearOperator>& precond, const Vector* x0) {
  const Index n = rhs.size();
  PcgResult out;
  out.x = x0 ? *x0 : Vector::Zero(n);

  Vector r(n), ap(n), z(n);
  if (x0) {
    matvec(out.x, ap);
    r = rhs - ap;
  } else {
    r = rhs;
  }
  double rnorm = r.norm();
  out.residual_norm = rnorm;
  if (rnorm <= tol) {
    out.converged = true;
    return out;
  }

  auto apply_precond = [&](const Vector& in, Vector& res) {
    if (precond) {
      (*precond)(in, res);
    } else {
      res = in;
    }
  };

  apply_precond(r, z);
  Vector p = z;
  double rz = r.dot(z);
  for (int it = 1; it <= maxit; ++it) {
    matvec(p, ap);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) {
      throw Breakdown("pcg: <p, Ap> <= 0, operator is not positive definite");
    }
    const double step = rz / pap;
    out.x.noalias() += step * p;
    r.noalias() -= step * ap;
    rnorm = r.norm();
    out.iterations = it;
    out.residual_norm = rnorm;
    if (rnorm <= tol) {
      out.converged = true;
      return out;
    }
    apply_precond(r, z);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return out;
}

LinearOperator diagonal_preconditioner(Vector diag) {
  if (!(diag.minCoeff() > 0.0)) {
    throw Error("diagonal preconditioner needs a strictly positive diagonal");
  }
  Vector inv = diag.cwiseInverse();
  return [inv = std::move(inv)](const Vector& in, Vector& out) { out = inv.cwiseProduct(in); };
}

bool probably_spd(const LinearOperator& matvec, Index dim, int trials, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector d(dim), ad(dim);
  for (int t = 0; t < trials; ++t) {
    for (Index i = 0; i < dim; ++i) d[i] = normal(rng);
    matvec(d, ad);
    if (!(d.dot(ad) > 0.0)) return false;
  }
  return true;
}

}  // namespace ripalm
