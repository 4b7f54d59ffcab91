#pragma once

// Fused passes over m-by-n column-major arrays used by the transport solvers.
//
// Every kernel has a scalar reference implementation and an AVX2 variant;
// the variant is chosen once at startup from CPUID and can be overridden
// (tests run both and compare). Elementwise outputs are bit-identical across
// variants except where exp is involved (a few ulps); reductions agree up to
// summation order.

#include <cstdint>
#include <vector>

#include "ripalm/numerics/dense.hpp"

namespace ripalm::kernels {

enum class Isa { kScalar, kAvx2 };

const char* isa_name(Isa isa);
bool isa_supported(Isa isa);
/// Best variant the running CPU supports.
Isa detect_isa();
Isa active_isa();
/// Throws Error if `isa` is not supported on this CPU.
void set_isa(Isa isa);

/// Scoped ISA override; restores the previous selection on destruction.
class IsaGuard {
 public:
  explicit IsaGuard(Isa isa) : previous_(active_isa()) { set_isa(isa); }
  ~IsaGuard() { set_isa(previous_); }
  IsaGuard(const IsaGuard&) = delete;
  IsaGuard& operator=(const IsaGuard&) = delete;

 private:
  Isa previous_;
};

// ---------------------------------------------------------------------------
// Proximal pass of the transport subproblem.
//
//   z_ij = xbar_ij + sigma (u_i + v_j)
//   w_ij = z_ij - sigma c_ij
//   p_ij = max(w_ij, 0) / (1 + lambda sigma)
//
// Accumulates row/column sums of p, the Moreau-envelope term
//   phi = sum p (2 z - p) / (2 sigma) - lambda/2 p^2 - c p,
// the primal step sum (p - xbar)^2 and the support size; optionally stores p.
// ---------------------------------------------------------------------------
struct ProxPassInput {
  const double* cost = nullptr;
  const double* xbar = nullptr;
  const double* u = nullptr;
  const double* v = nullptr;
  Index m = 0;
  Index n = 0;
  double sigma = 1.0;
  double lambda = 0.0;
};

struct ProxPassOutput {
  double* row_sum = nullptr;  // length m, overwritten
  double* col_sum = nullptr;  // length n, overwritten
  double* plan = nullptr;     // optional m*n output
  double phi_sum = 0.0;
  double step_sq = 0.0;
  Index support = 0;
};

void prox_pass(const ProxPassInput& in, ProxPassOutput& out);

/// Compressed-column index structure of {(i, j) : w_ij > 0} with w as above.
struct ActiveSet {
  Index m = 0;
  Index n = 0;
  std::vector<Index> col_ptr;  // n + 1 entries
  std::vector<Index> row_idx;  // nnz entries, increasing within a column
  Index nnz() const { return static_cast<Index>(row_idx.size()); }
};

void active_set(const ProxPassInput& in, ActiveSet& out);

// ---------------------------------------------------------------------------
// KKT statistics for a transport plan X and potentials (u, v), with
//   Z_ij = c_ij + lambda x_ij - u_i - v_j.
// ---------------------------------------------------------------------------
struct KktSums {
  double neg_plan_sq = 0.0;    // sum min(x, 0)^2
  double plan_sq = 0.0;        // sum x^2
  double neg_z_sq = 0.0;       // sum min(Z, 0)^2
  double plan_dot_z = 0.0;     // sum x Z
  double cost_dot_plan = 0.0;  // sum c x
  double conj_sq = 0.0;        // sum max(u_i + v_j - c_ij, 0)^2
};

struct KktPassInput {
  const double* plan = nullptr;
  const double* cost = nullptr;
  const double* u = nullptr;
  const double* v = nullptr;
  Index m = 0;
  Index n = 0;
  double lambda = 0.0;
};

/// row_sum (m) and col_sum (n) receive the marginals of X.
void kkt_pass(const KktPassInput& in, double* row_sum, double* col_sum, KktSums& sums);

// ---------------------------------------------------------------------------
// One W/X sweep of the dual ADMM for the transport dual:
//   q   = u_i + v_j + x_ij / sigma
//   W'  = q - max(q - c, 0) / (1 + lambda sigma)
//   X'  = X + step sigma (u_i + v_j - W')
// W and X are updated in place. Also returns the marginals of W' and X',
// sum (u_i + v_j - W')^2 and the KKT statistics of (X', u, v).
// ---------------------------------------------------------------------------
struct AdmmPassInput {
  const double* cost = nullptr;
  const double* u = nullptr;
  const double* v = nullptr;
  Index m = 0;
  Index n = 0;
  double sigma = 1.0;
  double lambda = 0.0;
  double step = 1.618;
};

struct AdmmPassOutput {
  double* w_row = nullptr;  // m
  double* w_col = nullptr;  // n
  double* x_row = nullptr;  // m
  double* x_col = nullptr;  // n
  double primal_sq = 0.0;
  KktSums kkt;
};

void admm_pass(const AdmmPassInput& in, double* w, double* x, AdmmPassOutput& out);

// ---------------------------------------------------------------------------
// Sinkhorn helpers for the Bregman proximal warm start.
// ---------------------------------------------------------------------------

/// xi_ij = x_ij * exp(-(c_ij + lambda x_ij) / mu); row_sum = xi * v.
/// Returns the number of strictly positive xi entries.
Index gibbs_pass(const double* cost, const double* x, const double* v, Index m, Index n,
                 double lambda, double mu, double* xi, double* row_sum);

/// col_sum_j = sum_i u_i xi_ij.
void scaled_col_sum(const double* xi, const double* u, Index m, Index n, double* col_sum);

/// x_ij = u_i xi_ij v_j.
void scale_plan(const double* xi, const double* u, const double* v, Index m, Index n, double* x);

/// Elementwise exp of a buffer (exposed for equivalence testing).
void exp_inplace(double* data, Index len);

// ---------------------------------------------------------------------------
// Per-variant entry points. Tests call these directly to compare variants.
// ---------------------------------------------------------------------------
struct KernelTable {
  void (*prox_pass)(const ProxPassInput&, ProxPassOutput&);
  void (*active_set)(const ProxPassInput&, ActiveSet&);
  void (*kkt_pass)(const KktPassInput&, double*, double*, KktSums&);
  void (*admm_pass)(const AdmmPassInput&, double*, double*, AdmmPassOutput&);
  Index (*gibbs_pass)(const double*, const double*, const double*, Index, Index, double, double,
                      double*, double*);
  void (*scaled_col_sum)(const double*, const double*, Index, Index, double*);
  void (*scale_plan)(const double*, const double*, const double*, Index, Index, double*);
  void (*exp_inplace)(double*, Index);
};

const KernelTable& scalar_table();
/// Only valid when isa_supported(Isa::kAvx2).
const KernelTable& avx2_table();
const KernelTable& table_for(Isa isa);

}  // namespace ripalm::kernels
