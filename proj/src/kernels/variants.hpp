#pragma once

#include "ripalm/kernels/kernels.hpp"

namespace ripalm::kernels {
namespace scalar {
void prox_pass(const ProxPassInput& in, ProxPassOutput& out);
void active_set(const ProxPassInput& in, ActiveSet& out);
void kkt_pass(const KktPassInput& in, double* row_sum, double* col_sum, KktSums& sums);
void admm_pass(const AdmmPassInput& in, double* w, double* x, AdmmPassOutput& out);
Index gibbs_pass(const double* cost, const double* x, const double* v, Index m, Index n,
                 double lambda, double mu, double* xi, double* row_sum);
void scaled_col_sum(const double* xi, const double* u, Index m, Index n, double* col_sum);
void scale_plan(const double* xi, const double* u, const double* v, Index m, Index n, double* x);
void exp_inplace(double* data, Index len);
}  // namespace scalar

namespace avx2 {
void prox_pass(const ProxPassInput& in, ProxPassOutput& out);
void active_set(const ProxPassInput& in, ActiveSet& out);
void kkt_pass(const KktPassInput& in, double* row_sum, double* col_sum, KktSums& sums);
void admm_pass(const AdmmPassInput& in, double* w, double* x, AdmmPassOutput& out);
Index gibbs_pass(const double* cost, const double* x, const double* v, Index m, Index n,
                 double lambda, double mu, double* xi, double* row_sum);
void scaled_col_sum(const double* xi, const double* u, Index m, Index n, double* col_sum);
void scale_plan(const double* xi, const double* u, const double* v, Index m, Index n, double* x);
void exp_inplace(double* data, Index len);
}  // namespace avx2
}  // namespace ripalm::kernels
