// Reference kernels. The AVX2 variants reproduce the elementwise operation
// order used here exactly.

#include <algorithm>
#include <cmath>

#include "variants.hpp"

namespace ripalm::kernels::scalar {

void prox_pass(const ProxPassInput& in, ProxPassOutput& out) {
  const Index m = in.m;
  const Index n = in.n;
  const double sigma = in.sigma;
  const double denom = 1.0 + in.lambda * in.sigma;
  const double half_lambda = 0.5 * in.lambda;
  const double inv_two_sigma = 0.5 / sigma;

  std::fill_n(out.row_sum, m, 0.0);
  double phi = 0.0;
  double step = 0.0;
  Index support = 0;
  for (Index j = 0; j < n; ++j) {
    const double vj = in.v[j];
    const double* c = in.cost + j * m;
    const double* xb = in.xbar + j * m;
    double* pj = out.plan ? out.plan + j * m : nullptr;
    double col = 0.0;
    for (Index i = 0; i < m; ++i) {
      const double z = xb[i] + sigma * (in.u[i] + vj);
      const double w = z - sigma * c[i];
      const double p = (w > 0.0 ? w : 0.0) / denom;
      const double dx = p - xb[i];
      step += dx * dx;
      if (pj) pj[i] = p;
      if (p > 0.0) {
        ++support;
        out.row_sum[i] += p;
        col += p;
        phi += p * (2.0 * z - p) * inv_two_sigma - half_lambda * p * p - c[i] * p;
      }
    }
    out.col_sum[j] = col;
  }
  out.phi_sum = phi;
  out.step_sq = step;
  out.support = support;
}

void active_set(const ProxPassInput& in, ActiveSet& out) {
  const Index m = in.m;
  const Index n = in.n;
  const double sigma = in.sigma;
  out.m = m;
  out.n = n;
  out.col_ptr.assign(n + 1, 0);
  out.row_idx.clear();
  for (Index j = 0; j < n; ++j) {
    const double vj = in.v[j];
    const double* c = in.cost + j * m;
    const double* xb = in.xbar + j * m;
    for (Index i = 0; i < m; ++i) {
      const double z = xb[i] + sigma * (in.u[i] + vj);
      const double w = z - sigma * c[i];
      if (w > 0.0) out.row_idx.push_back(i);
    }
    out.col_ptr[j + 1] = static_cast<Index>(out.row_idx.size());
  }
}

void kkt_pass(const KktPassInput& in, double* row_sum, double* col_sum, KktSums& sums) {
  const Index m = in.m;
  const Index n = in.n;
  const double lambda = in.lambda;
  std::fill_n(row_sum, m, 0.0);
  KktSums s;
  for (Index j = 0; j < n; ++j) {
    const double vj = in.v[j];
    const double* c = in.cost + j * m;
    const double* x = in.plan + j * m;
    double col = 0.0;
    for (Index i = 0; i < m; ++i) {
      const double xi = x[i];
      const double z = ((c[i] + lambda * xi) - in.u[i]) - vj;
      const double negx = xi < 0.0 ? xi : 0.0;
      const double negz = z < 0.0 ? z : 0.0;
      const double t = (in.u[i] + vj) - c[i];
      const double pos = t > 0.0 ? t : 0.0;
      row_sum[i] += xi;
      col += xi;
      s.neg_plan_sq += negx * negx;
      s.plan_sq += xi * xi;
      s.neg_z_sq += negz * negz;
      s.plan_dot_z += xi * z;
      s.cost_dot_plan += c[i] * xi;
      s.conj_sq += pos * pos;
    }
    col_sum[j] = col;
  }
  sums = s;
}

void admm_pass(const AdmmPassInput& in, double* w, double* x, AdmmPassOutput& out) {
  const Index m = in.m;
  const Index n = in.n;
  const double sigma = in.sigma;
  const double lambda = in.lambda;
  const double denom = 1.0 + lambda * sigma;
  const double step_sigma = in.step * sigma;
  std::fill_n(out.w_row, m, 0.0);
  std::fill_n(out.x_row, m, 0.0);
  double primal = 0.0;
  KktSums s;
  for (Index j = 0; j < n; ++j) {
    const double vj = in.v[j];
    const double* c = in.cost + j * m;
    double* wj = w + j * m;
    double* xj = x + j * m;
    double wcol = 0.0;
    double xcol = 0.0;
    for (Index i = 0; i < m; ++i) {
      const double uv = in.u[i] + vj;
      const double q = uv + xj[i] / sigma;
      const double t = q - c[i];
      const double wn = q - (t > 0.0 ? t : 0.0) / denom;
      const double r = uv - wn;
      const double xn = xj[i] + step_sigma * r;
      wj[i] = wn;
      xj[i] = xn;
      primal += r * r;
      out.w_row[i] += wn;
      wcol += wn;
      out.x_row[i] += xn;
      xcol += xn;

      const double z = ((c[i] + lambda * xn) - in.u[i]) - vj;
      const double negx = xn < 0.0 ? xn : 0.0;
      const double negz = z < 0.0 ? z : 0.0;
      const double tc = uv - c[i];
      const double pos = tc > 0.0 ? tc : 0.0;
      s.neg_plan_sq += negx * negx;
      s.plan_sq += xn * xn;
      s.neg_z_sq += negz * negz;
      s.plan_dot_z += xn * z;
      s.cost_dot_plan += c[i] * xn;
      s.conj_sq += pos * pos;
    }
    out.w_col[j] = wcol;
    out.x_col[j] = xcol;
  }
  out.primal_sq = primal;
  out.kkt = s;
}

Index gibbs_pass(const double* cost, const double* x, const double* v, Index m, Index n,
                 double lambda, double mu, double* xi, double* row_sum) {
  std::fill_n(row_sum, m, 0.0);
  Index positive = 0;
  for (Index j = 0; j < n; ++j) {
    const double vj = v[j];
    const double* c = cost + j * m;
    const double* xj = x + j * m;
    double* kj = xi + j * m;
    for (Index i = 0; i < m; ++i) {
      const double e = std::exp(-(c[i] + lambda * xj[i]) / mu);
      const double k = xj[i] * e;
      kj[i] = k;
      if (k > 0.0) ++positive;
      row_sum[i] += k * vj;
    }
  }
  return positive;
}

void scaled_col_sum(const double* xi, const double* u, Index m, Index n, double* col_sum) {
  for (Index j = 0; j < n; ++j) {
    const double* kj = xi + j * m;
    double acc = 0.0;
    for (Index i = 0; i < m; ++i) acc += u[i] * kj[i];
    col_sum[j] = acc;
  }
}

void scale_plan(const double* xi, const double* u, const double* v, Index m, Index n, double* x) {
  for (Index j = 0; j < n; ++j) {
    const double vj = v[j];
    const double* kj = xi + j * m;
    double* xj = x + j * m;
    for (Index i = 0; i < m; ++i) xj[i] = (u[i] * kj[i]) * vj;
  }
}

void exp_inplace(double* data, Index len) {
  for (Index i = 0; i < len; ++i) data[i] = std::exp(data[i]);
}

}  // namespace ripalm::kernels::scalar
