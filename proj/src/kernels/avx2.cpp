// AVX2 variants. Compiled with per-function target attributes so the rest
// of the binary stays baseline x86-64; only called after CPUID says so.

#include <algorithm>
#include <cmath>

#include "variants.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define RIPALM_HAVE_X86 1
#else
#define RIPALM_HAVE_X86 0
#endif

#if RIPALM_HAVE_X86

#define RIPALM_AVX2 __attribute__((target("avx2,fma")))

namespace ripalm::kernels::avx2 {
namespace {

RIPALM_AVX2 inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  const __m128d high64 = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, high64));
}

RIPALM_AVX2 inline Index popcount_mask(__m256d mask) {
  return __builtin_popcount(static_cast<unsigned>(_mm256_movemask_pd(mask)));
}

// exp(x) for x <= 709: range reduction by ln 2 and a degree-13 Taylor
// polynomial on |r| <= ln2/2. Inputs below -708.39 return 0 (no subnormals).
RIPALM_AVX2 inline __m256d exp_pd(__m256d x) {
  const __m256d lo_limit = _mm256_set1_pd(-708.3964185322641);
  const __m256d hi_limit = _mm256_set1_pd(709.0);
  const __m256d underflow = _mm256_cmp_pd(x, lo_limit, _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, lo_limit), hi_limit);

  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, ln2_hi, x);
  r = _mm256_fnmadd_pd(k, ln2_lo, r);

  static constexpr double kCoeff[] = {
      1.0 / 6227020800.0,  // 1/13!
      1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0, 1.0 / 40320.0,
      1.0 / 5040.0,      1.0 / 720.0,      1.0 / 120.0,     1.0 / 24.0,     1.0 / 6.0,
      0.5,               1.0,              1.0};
  __m256d poly = _mm256_set1_pd(kCoeff[0]);
  for (int c = 1; c < 14; ++c) poly = _mm256_fmadd_pd(poly, r, _mm256_set1_pd(kCoeff[c]));

  // 2^k through the exponent field: k + 1023 lands in the low mantissa bits
  // after adding 1.5 * 2^52, then shifts into place.
  const __m256d magic = _mm256_set1_pd(6755399441055744.0 + 1023.0);
  const __m256i biased = _mm256_castpd_si256(_mm256_add_pd(k, magic));
  const __m256d scale = _mm256_castsi256_pd(_mm256_slli_epi64(biased, 52));
  const __m256d result = _mm256_mul_pd(poly, scale);
  return _mm256_andnot_pd(underflow, result);
}

}  // namespace

RIPALM_AVX2 void prox_pass(const ProxPassInput& in, ProxPassOutput& out) {
  const Index m = in.m;
  const Index n = in.n;
  const double sigma = in.sigma;
  const double denom = 1.0 + in.lambda * in.sigma;
  const double half_lambda = 0.5 * in.lambda;
  const double inv_two_sigma = 0.5 / sigma;
  const Index m4 = m - (m & 3);

  const __m256d vsigma = _mm256_set1_pd(sigma);
  const __m256d vdenom = _mm256_set1_pd(denom);
  const __m256d vhalf_lambda = _mm256_set1_pd(half_lambda);
  const __m256d vinv2s = _mm256_set1_pd(inv_two_sigma);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d zero = _mm256_setzero_pd();

  std::fill_n(out.row_sum, m, 0.0);
  __m256d phi = zero;
  __m256d step = zero;
  double phi_tail = 0.0;
  double step_tail = 0.0;
  Index support = 0;
  for (Index j = 0; j < n; ++j) {
    const double vj = in.v[j];
    const __m256d vvj = _mm256_set1_pd(vj);
    const double* c = in.cost + j * m;
    const double* xb = in.xbar + j * m;
    double* pj = out.plan ? out.plan + j * m : nullptr;
    __m256d col = zero;
    Index i = 0;
    for (; i < m4; i += 4) {
      const __m256d ci = _mm256_loadu_pd(c + i);
      const __m256d xbi = _mm256_loadu_pd(xb + i);
      const __m256d ui = _mm256_loadu_pd(in.u + i);
      const __m256d z = _mm256_add_pd(xbi, _mm256_mul_pd(vsigma, _mm256_add_pd(ui, vvj)));
      const __m256d w = _mm256_sub_pd(z, _mm256_mul_pd(vsigma, ci));
      const __m256d p = _mm256_div_pd(_mm256_max_pd(w, zero), vdenom);
      const __m256d dx = _mm256_sub_pd(p, xbi);
      step = _mm256_add_pd(step, _mm256_mul_pd(dx, dx));
      if (pj) _mm256_storeu_pd(pj + i, p);
      const __m256d positive = _mm256_cmp_pd(p, zero, _CMP_GT_OQ);
      if (_mm256_movemask_pd(positive) == 0) continue;
      support += popcount_mask(positive);
      _mm256_storeu_pd(out.row_sum + i, _mm256_add_pd(_mm256_loadu_pd(out.row_sum + i), p));
      col = _mm256_add_pd(col, p);
      __m256d t = _mm256_mul_pd(p, _mm256_sub_pd(_mm256_mul_pd(two, z), p));
      t = _mm256_mul_pd(t, vinv2s);
      t = _mm256_sub_pd(t, _mm256_mul_pd(vhalf_lambda, _mm256_mul_pd(p, p)));
      t = _mm256_sub_pd(t, _mm256_mul_pd(ci, p));
      phi = _mm256_add_pd(phi, t);
    }
    double col_tail = 0.0;
    for (; i < m; ++i) {
      const double z = xb[i] + sigma * (in.u[i] + vj);
      const double w = z - sigma * c[i];
      const double p = (w > 0.0 ? w : 0.0) / denom;
      const double dx = p - xb[i];
      step_tail += dx * dx;
      if (pj) pj[i] = p;
      if (p > 0.0) {
        ++support;
        out.row_sum[i] += p;
        col_tail += p;
        phi_tail += p * (2.0 * z - p) * inv_two_sigma - half_lambda * p * p - c[i] * p;
      }
    }
    out.col_sum[j] = hsum(col) + col_tail;
  }
  out.phi_sum = hsum(phi) + phi_tail;
  out.step_sq = hsum(step) + step_tail;
  out.support = support;
}

RIPALM_AVX2 void active_set(const ProxPassInput& in, ActiveSet& out) {
  const Index m = in.m;
  const Index n = in.n;
  const double sigma = in.sigma;
  const Index m4 = m - (m & 3);
  const __m256d vsigma = _mm256_set1_pd(sigma);
  const __m256d zero = _mm256_setzero_pd();
  out.m = m;
  out.n = n;
  out.col_ptr.assign(n + 1, 0);
  out.row_idx.clear();
  for (Index j = 0; j < n; ++j) {
    const double vj = in.v[j];
    const __m256d vvj = _mm256_set1_pd(vj);
    const double* c = in.cost + j * m;
    const double* xb = in.xbar + j * m;
    Index i = 0;
    for (; i < m4; i += 4) {
      const __m256d z = _mm256_add_pd(
          _mm256_loadu_pd(xb + i),
          _mm256_mul_pd(vsigma, _mm256_add_pd(_mm256_loadu_pd(in.u + i), vvj)));
      const __m256d w = _mm256_sub_pd(z, _mm256_mul_pd(vsigma, _mm256_loadu_pd(c + i)));
      int bits = _mm256_movemask_pd(_mm256_cmp_pd(w, zero, _CMP_GT_OQ));
      while (bits) {
        const int lane = __builtin_ctz(static_cast<unsigned>(bits));
        out.row_idx.push_back(i + lane);
        bits &= bits - 1;
      }
    }
    for (; i < m; ++i) {
      const double z = xb[i] + sigma * (in.u[i] + vj);
      const double w = z - sigma * c[i];
      if (w > 0.0) out.row_idx.push_back(i);
    }
    out.col_ptr[j + 1] = static_cast<Index>(out.row_idx.size());
  }
}

namespace {

struct KktAccum {
  __m256d neg_plan_sq, plan_sq, neg_z_sq, plan_dot_z, cost_dot_plan, conj_sq;
};

RIPALM_AVX2 inline void kkt_zero(KktAccum& a) {
  a.neg_plan_sq = a.plan_sq = a.neg_z_sq = a.plan_dot_z = a.cost_dot_plan = a.conj_sq =
      _mm256_setzero_pd();
}

RIPALM_AVX2 inline void kkt_lane(KktAccum& a, __m256d x, __m256d c, __m256d u, __m256d vj,
                                 __m256d lambda) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d z = _mm256_sub_pd(_mm256_sub_pd(_mm256_add_pd(c, _mm256_mul_pd(lambda, x)), u), vj);
  const __m256d negx = _mm256_min_pd(x, zero);
  const __m256d negz = _mm256_min_pd(z, zero);
  const __m256d pos = _mm256_max_pd(_mm256_sub_pd(_mm256_add_pd(u, vj), c), zero);
  a.neg_plan_sq = _mm256_add_pd(a.neg_plan_sq, _mm256_mul_pd(negx, negx));
  a.plan_sq = _mm256_add_pd(a.plan_sq, _mm256_mul_pd(x, x));
  a.neg_z_sq = _mm256_add_pd(a.neg_z_sq, _mm256_mul_pd(negz, negz));
  a.plan_dot_z = _mm256_add_pd(a.plan_dot_z, _mm256_mul_pd(x, z));
  a.cost_dot_plan = _mm256_add_pd(a.cost_dot_plan, _mm256_mul_pd(c, x));
  a.conj_sq = _mm256_add_pd(a.conj_sq, _mm256_mul_pd(pos, pos));
}

inline void kkt_scalar(KktSums& s, double x, double c, double u, double vj, double lambda) {
  const double z = ((c + lambda * x) - u) - vj;
  const double negx = x < 0.0 ? x : 0.0;
  const double negz = z < 0.0 ? z : 0.0;
  const double t = (u + vj) - c;
  const double pos = t > 0.0 ? t : 0.0;
  s.neg_plan_sq += negx * negx;
  s.plan_sq += x * x;
  s.neg_z_sq += negz * negz;
  s.plan_dot_z += x * z;
  s.cost_dot_plan += c * x;
  s.conj_sq += pos * pos;
}

RIPALM_AVX2 inline KktSums kkt_finish(const KktAccum& a, const KktSums& tail) {
  KktSums s;
  s.neg_plan_sq = hsum(a.neg_plan_sq) + tail.neg_plan_sq;
  s.plan_sq = hsum(a.plan_sq) + tail.plan_sq;
  s.neg_z_sq = hsum(a.neg_z_sq) + tail.neg_z_sq;
  s.plan_dot_z = hsum(a.plan_dot_z) + tail.plan_dot_z;
  s.cost_dot_plan = hsum(a.cost_dot_plan) + tail.cost_dot_plan;
  s.conj_sq = hsum(a.conj_sq) + tail.conj_sq;
  return s;
}

}  // namespace

RIPALM_AVX2 void kkt_pass(const KktPassInput& in, double* row_sum, double* col_sum,
                          KktSums& sums) {
  const Index m = in.m;
  const Index n = in.n;
  const Index m4 = m - (m & 3);
  const __m256d vlambda = _mm256_set1_pd(in.lambda);
  std::fill_n(row_sum, m, 0.0);
  KktAccum acc;
  kkt_zero(acc);
  KktSums tail;
  for (Index j = 0; j < n; ++j) {
    const double vj = in.v[j];
    const __m256d vvj = _mm256_set1_pd(vj);
    const double* c = in.cost + j * m;
    const double* x = in.plan + j * m;
    __m256d col = _mm256_setzero_pd();
    Index i = 0;
    for (; i < m4; i += 4) {
      const __m256d xi = _mm256_loadu_pd(x + i);
      const __m256d ui = _mm256_loadu_pd(in.u + i);
      kkt_lane(acc, xi, _mm256_loadu_pd(c + i), ui, vvj, vlambda);
      _mm256_storeu_pd(row_sum + i, _mm256_add_pd(_mm256_loadu_pd(row_sum + i), xi));
      col = _mm256_add_pd(col, xi);
    }
    double col_tail = 0.0;
    for (; i < m; ++i) {
      kkt_scalar(tail, x[i], c[i], in.u[i], vj, in.lambda);
      row_sum[i] += x[i];
      col_tail += x[i];
    }
    col_sum[j] = hsum(col) + col_tail;
  }
  sums = kkt_finish(acc, tail);
}

RIPALM_AVX2 void admm_pass(const AdmmPassInput& in, double* w, double* x, AdmmPassOutput& out) {
  const Index m = in.m;
  const Index n = in.n;
  const Index m4 = m - (m & 3);
  const double sigma = in.sigma;
  const double lambda = in.lambda;
  const double denom = 1.0 + lambda * sigma;
  const double step_sigma = in.step * sigma;
  const __m256d vsigma = _mm256_set1_pd(sigma);
  const __m256d vlambda = _mm256_set1_pd(lambda);
  const __m256d vdenom = _mm256_set1_pd(denom);
  const __m256d vstep = _mm256_set1_pd(step_sigma);
  const __m256d zero = _mm256_setzero_pd();

  std::fill_n(out.w_row, m, 0.0);
  std::fill_n(out.x_row, m, 0.0);
  __m256d primal = zero;
  double primal_tail = 0.0;
  KktAccum acc;
  kkt_zero(acc);
  KktSums tail;
  for (Index j = 0; j < n; ++j) {
    const double vj = in.v[j];
    const __m256d vvj = _mm256_set1_pd(vj);
    const double* c = in.cost + j * m;
    double* wj = w + j * m;
    double* xj = x + j * m;
    __m256d wcol = zero;
    __m256d xcol = zero;
    Index i = 0;
    for (; i < m4; i += 4) {
      const __m256d ui = _mm256_loadu_pd(in.u + i);
      const __m256d ci = _mm256_loadu_pd(c + i);
      const __m256d xo = _mm256_loadu_pd(xj + i);
      const __m256d uv = _mm256_add_pd(ui, vvj);
      const __m256d q = _mm256_add_pd(uv, _mm256_div_pd(xo, vsigma));
      const __m256d t = _mm256_sub_pd(q, ci);
      const __m256d wn = _mm256_sub_pd(q, _mm256_div_pd(_mm256_max_pd(t, zero), vdenom));
      const __m256d r = _mm256_sub_pd(uv, wn);
      const __m256d xn = _mm256_add_pd(xo, _mm256_mul_pd(vstep, r));
      _mm256_storeu_pd(wj + i, wn);
      _mm256_storeu_pd(xj + i, xn);
      primal = _mm256_add_pd(primal, _mm256_mul_pd(r, r));
      _mm256_storeu_pd(out.w_row + i, _mm256_add_pd(_mm256_loadu_pd(out.w_row + i), wn));
      _mm256_storeu_pd(out.x_row + i, _mm256_add_pd(_mm256_loadu_pd(out.x_row + i), xn));
      wcol = _mm256_add_pd(wcol, wn);
      xcol = _mm256_add_pd(xcol, xn);
      kkt_lane(acc, xn, ci, ui, vvj, vlambda);
    }
    double wcol_tail = 0.0;
    double xcol_tail = 0.0;
    for (; i < m; ++i) {
      const double uv = in.u[i] + vj;
      const double q = uv + xj[i] / sigma;
      const double t = q - c[i];
      const double wn = q - (t > 0.0 ? t : 0.0) / denom;
      const double r = uv - wn;
      const double xn = xj[i] + step_sigma * r;
      wj[i] = wn;
      xj[i] = xn;
      primal_tail += r * r;
      out.w_row[i] += wn;
      out.x_row[i] += xn;
      wcol_tail += wn;
      xcol_tail += xn;
      kkt_scalar(tail, xn, c[i], in.u[i], vj, lambda);
    }
    out.w_col[j] = hsum(wcol) + wcol_tail;
    out.x_col[j] = hsum(xcol) + xcol_tail;
  }
  out.primal_sq = hsum(primal) + primal_tail;
  out.kkt = kkt_finish(acc, tail);
}

RIPALM_AVX2 Index gibbs_pass(const double* cost, const double* x, const double* v, Index m,
                             Index n, double lambda, double mu, double* xi, double* row_sum) {
  const Index m4 = m - (m & 3);
  const __m256d vlambda = _mm256_set1_pd(lambda);
  const __m256d vmu = _mm256_set1_pd(mu);
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d zero = _mm256_setzero_pd();
  std::fill_n(row_sum, m, 0.0);
  Index positive = 0;
  for (Index j = 0; j < n; ++j) {
    const double vj = v[j];
    const __m256d vvj = _mm256_set1_pd(vj);
    const double* c = cost + j * m;
    const double* xj = x + j * m;
    double* kj = xi + j * m;
    Index i = 0;
    for (; i < m4; i += 4) {
      const __m256d xv = _mm256_loadu_pd(xj + i);
      const __m256d a = _mm256_add_pd(_mm256_loadu_pd(c + i), _mm256_mul_pd(vlambda, xv));
      const __m256d e = exp_pd(_mm256_div_pd(_mm256_xor_pd(a, sign), vmu));
      const __m256d k = _mm256_mul_pd(xv, e);
      _mm256_storeu_pd(kj + i, k);
      positive += popcount_mask(_mm256_cmp_pd(k, zero, _CMP_GT_OQ));
      _mm256_storeu_pd(row_sum + i,
                       _mm256_add_pd(_mm256_loadu_pd(row_sum + i), _mm256_mul_pd(k, vvj)));
    }
    for (; i < m; ++i) {
      const double e = std::exp(-(c[i] + lambda * xj[i]) / mu);
      const double k = xj[i] * e;
      kj[i] = k;
      if (k > 0.0) ++positive;
      row_sum[i] += k * vj;
    }
  }
  return positive;
}

RIPALM_AVX2 void scaled_col_sum(const double* xi, const double* u, Index m, Index n,
                                double* col_sum) {
  const Index m4 = m - (m & 3);
  for (Index j = 0; j < n; ++j) {
    const double* kj = xi + j * m;
    __m256d acc = _mm256_setzero_pd();
    Index i = 0;
    for (; i < m4; i += 4) {
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(u + i), _mm256_loadu_pd(kj + i)));
    }
    double tail = 0.0;
    for (; i < m; ++i) tail += u[i] * kj[i];
    col_sum[j] = hsum(acc) + tail;
  }
}

RIPALM_AVX2 void scale_plan(const double* xi, const double* u, const double* v, Index m, Index n,
                            double* x) {
  const Index m4 = m - (m & 3);
  for (Index j = 0; j < n; ++j) {
    const double vj = v[j];
    const __m256d vvj = _mm256_set1_pd(vj);
    const double* kj = xi + j * m;
    double* xj = x + j * m;
    Index i = 0;
    for (; i < m4; i += 4) {
      const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(u + i), _mm256_loadu_pd(kj + i));
      _mm256_storeu_pd(xj + i, _mm256_mul_pd(prod, vvj));
    }
    for (; i < m; ++i) xj[i] = (u[i] * kj[i]) * vj;
  }
}

RIPALM_AVX2 void exp_inplace(double* data, Index len) {
  const Index len4 = len - (len & 3);
  Index i = 0;
  for (; i < len4; i += 4) _mm256_storeu_pd(data + i, exp_pd(_mm256_loadu_pd(data + i)));
  if (i < len) {
    alignas(32) double buf[4] = {0.0, 0.0, 0.0, 0.0};
    for (Index k = i; k < len; ++k) buf[k - i] = data[k];
    _mm256_store_pd(buf, exp_pd(_mm256_load_pd(buf)));
    for (Index k = i; k < len; ++k) data[k] = buf[k - i];
  }
}

}  // namespace ripalm::kernels::avx2

#else  // !RIPALM_HAVE_X86

// Non-x86 builds route the AVX2 table to the reference kernels; dispatch
// never selects it because isa_supported(kAvx2) is false there.
namespace ripalm::kernels::avx2 {
void prox_pass(const ProxPassInput& in, ProxPassOutput& out) { scalar::prox_pass(in, out); }
void active_set(const ProxPassInput& in, ActiveSet& out) { scalar::active_set(in, out); }
void kkt_pass(const KktPassInput& in, double* r, double* c, KktSums& s) {
  scalar::kkt_pass(in, r, c, s);
}
void admm_pass(const AdmmPassInput& in, double* w, double* x, AdmmPassOutput& out) {
  scalar::admm_pass(in, w, x, out);
}
Index gibbs_pass(const double* cost, const double* x, const double* v, Index m, Index n,
                 double lambda, double mu, double* xi, double* row_sum) {
  return scalar::gibbs_pass(cost, x, v, m, n, lambda, mu, xi, row_sum);
}
void scaled_col_sum(const double* xi, const double* u, Index m, Index n, double* col_sum) {
  scalar::scaled_col_sum(xi, u, m, n, col_sum);
}
void scale_plan(const double* xi, const double* u, const double* v, Index m, Index n, double* x) {
  scalar::scale_plan(xi, u, v, m, n, x);
}
void exp_inplace(double* data, Index len) { scalar::exp_inplace(data, len); }
}  // namespace ripalm::kernels::avx2

#endif
