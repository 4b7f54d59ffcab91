#include <atomic>

#include "ripalm/error.hpp"
#include "ripalm/kernels/kernels.hpp"
#include "variants.hpp"

namespace ripalm::kernels {
namespace {

constexpr KernelTable kScalarTable{
    scalar::prox_pass,      scalar::active_set, scalar::kkt_pass,   scalar::admm_pass,
    scalar::gibbs_pass,     scalar::scaled_col_sum, scalar::scale_plan, scalar::exp_inplace,
};

constexpr KernelTable kAvx2Table{
    avx2::prox_pass,      avx2::active_set, avx2::kkt_pass,   avx2::admm_pass,
    avx2::gibbs_pass,     avx2::scaled_col_sum, avx2::scale_plan, avx2::exp_inplace,
};

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{&table_for(detect_isa())};
  return table;
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

}  // namespace

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Isa detect_isa() { return isa_supported(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar; }

Isa active_isa() { return &active() == &kAvx2Table ? Isa::kAvx2 : Isa::kScalar; }

void set_isa(Isa isa) {
  if (!isa_supported(isa)) throw Error(std::string("ISA not supported on this CPU: ") + isa_name(isa));
  current().store(&table_for(isa), std::memory_order_relaxed);
}

const KernelTable& scalar_table() { return kScalarTable; }
const KernelTable& avx2_table() { return kAvx2Table; }
const KernelTable& table_for(Isa isa) { return isa == Isa::kAvx2 ? kAvx2Table : kScalarTable; }

void prox_pass(const ProxPassInput& in, ProxPassOutput& out) { active().prox_pass(in, out); }
void active_set(const ProxPassInput& in, ActiveSet& out) { active().active_set(in, out); }
void kkt_pass(const KktPassInput& in, double* row_sum, double* col_sum, KktSums& sums) {
  active().kkt_pass(in, row_sum, col_sum, sums);
}
void admm_pass(const AdmmPassInput& in, double* w, double* x, AdmmPassOutput& out) {
  active().admm_pass(in, w, x, out);
}
Index gibbs_pass(const double* cost, const double* x, const double* v, Index m, Index n,
                 double lambda, double mu, double* xi, double* row_sum) {
  return active().gibbs_pass(cost, x, v, m, n, lambda, mu, xi, row_sum);
}
void scaled_col_sum(const double* xi, const double* u, Index m, Index n, double* col_sum) {
  active().scaled_col_sum(xi, u, m, n, col_sum);
}
void scale_plan(const double* xi, const double* u, const double* v, Index m, Index n, double* x) {
  active().scale_plan(xi, u, v, m, n, x);
}
void exp_inplace(double* data, Index len) { active().exp_inplace(data, len); }

}  // namespace ripalm::kernels
