#pragma once

// Basis pursuit denoising
//
//   min |s|_1  s.t.  |D s - b| <= kappa,
//
// lifted to min |s|_1 + indicator(|t| <= kappa) s.t. D s - t = b. The primal
// variable is x = (s; t) in R^{n+m}, the dual variable y in R^m.

#include <cstdint>
#include <memory>
#include <vector>

#include "ripalm/core/ripalm.hpp"

namespace ripalm::bpdn {

/// Noise bounds below this are raised to it so the ball never degenerates.
inline constexpr double kMinKappa = 1e-12;

struct BpdnInstance {
  Matrix dict;  // D, m x n
  Vector b;     // m
  double kappa = 1.0;

  Index m() const { return dict.rows(); }
  Index n() const { return dict.cols(); }
};

/// Throws InputError on shape mismatch, non-finite data or kappa <= 0.
void validate(const BpdnInstance& inst);

/// sign(u) max(|u| - sigma, 0), entrywise.
Vector prox_l1(const Vector& u, double sigma);

/// Projection onto {|v| <= kappa}.
Vector proj_l2ball(const Vector& v, double kappa);

struct SyntheticBpdn {
  BpdnInstance instance;
  Vector signal;  // the sparse vector used to build b
};

/// D with i.i.d. N(0, 1) entries, a `sparsity`-sparse N(0, 1) signal on a
/// uniformly drawn support, b = D s + delta zeta and kappa = delta |zeta|
/// (clamped below at kMinKappa).
SyntheticBpdn synthetic_instance(Index m, Index n, Index sparsity, double delta,
                                 std::uint64_t seed);

/// Generalized Jacobian element of the subproblem gradient at y:
///   H = sigma (D_I D_I^T + V) + (tau / sigma) I
/// with I = {i : |sbar_i + sigma (D^T y)_i| > sigma} and V = I when
/// |tbar - sigma y| <= kappa, otherwise (kappa/|v|)(I - v v^T / |v|^2).
struct NewtonSystem {
  std::vector<Index> active;
  bool exterior = false;  // |v| > kappa
  Vector v;               // tbar - sigma y
  double v_norm = 0.0;
  double sigma = 1.0;
  double tau = 1.0;
  double kappa = 1.0;

  void apply(const BpdnInstance& inst, const Vector& d, Vector& out) const;
  Matrix dense(const BpdnInstance& inst) const;

  /// Solves H d = -g with the low-rank structure: an m x m factorization when
  /// m <= |I|, otherwise a |I| x |I| Sherman-Morrison-Woodbury system.
  Vector solve(const BpdnInstance& inst, const Vector& g) const;
};

NewtonSystem assemble_newton_system(const BpdnInstance& inst, const Vector& y,
                                    const Vector& sbar, const Vector& tbar, double sigma,
                                    double tau);

class BpdnSubproblem final : public Subproblem {
 public:
  /// `xbar` = (sbar; tbar) must outlive the object.
  BpdnSubproblem(const BpdnInstance& inst, const Vector& xbar, const Vector& ybar, double sigma,
                 double tau);

  Index dim() const override { return inst_.m(); }
  double value(const Vector& y) override;
  void gradient(const Vector& y, Vector& g) override;
  Vector newton_direction(const Vector& y, const Vector& g, double tol) override;
  void jacobian_apply(const Vector& y, const Vector& d, Vector& out) override;
  double primal_step_sq(const Vector& y) override;

  const NewtonSystem& system_at(const Vector& y);

 private:
  void evaluate(const Vector& y);

  const BpdnInstance& inst_;
  Vector sbar_;
  Vector tbar_;
  Vector ybar_;
  double sigma_;
  double tau_;
  double xbar_sq_;

  Vector cached_y_;
  double cached_value_ = 0.0;
  Vector cached_grad_;
  double cached_step_sq_ = 0.0;

  Vector sys_y_;
  std::unique_ptr<NewtonSystem> sys_;
};

class BpdnOracle final : public ProblemOracle {
 public:
  explicit BpdnOracle(const BpdnInstance& inst) : inst_(inst) {}

  Index dual_dim() const override { return inst_.m(); }
  Index primal_dim() const override { return inst_.n() + inst_.m(); }
  void apply_A(const Vector& x, Vector& out) const override;
  void apply_At(const Vector& y, Vector& out) const override;
  void prox(const Vector& point, double sigma, Vector& out) const override;
  const Vector& b() const override { return inst_.b; }
  std::unique_ptr<Subproblem> make_subproblem(const Vector& xbar, const Vector& ybar,
                                              double sigma, double tau) const override;

 private:
  const BpdnInstance& inst_;
};

double phi_value(const BpdnInstance& inst, const Vector& y, const Vector& sbar,
                 const Vector& tbar, const Vector& ybar, double sigma, double tau);
Vector grad_phi(const BpdnInstance& inst, const Vector& y, const Vector& sbar,
                const Vector& tbar, const Vector& ybar, double sigma, double tau);

/// Relative KKT residuals of (s, t, y):
///   primal = |D s - b - t| / (1 + |b|)
///   dual   = sqrt(|s - prox_l1(s + D^T y, 1)|^2 + |t - proj(t - y)|^2) / (1 + |D|_F)
///   gap    = |pobj - dobj| / (1 + |pobj| + |dobj|),
/// pobj = |s|_1, dobj = -kappa |y| + b^T y.
struct BpdnResiduals {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double res = 0.0;
  double pobj = 0.0;
  double dobj = 0.0;
};

/// `dict_norm` is |D|_F when already known (negative: compute it).
BpdnResiduals kkt_residuals(const BpdnInstance& inst, const Vector& s, const Vector& t,
                            const Vector& y, double dict_norm = -1.0);

/// Independent entry-by-entry recomputation for certification.
BpdnResiduals certify(const BpdnInstance& inst, const Vector& s, const Vector& t,
                      const Vector& y);

struct FeasNobj {
  double feas = 0.0;  // max(|D s - b| - kappa, 0) / (1 + |b|)
  double nobj = 0.0;  // ||s|_1 - |s_ref|_1| / (1 + |s_ref|_1)
};
FeasNobj feas_nobj(const BpdnInstance& inst, const Vector& s, const Vector& s_ref);

struct BpdnSolution {
  Vector s;
  Vector t;
  Vector y;
  RipalmState state;
  SolveReport report;
  BpdnResiduals residuals;
};

BpdnSolution solve_ripalm(const BpdnInstance& inst, const RipalmConfig& cfg, const Vector& y0,
                          const Vector& s0, const Vector& t0, const Observer& observer = {});
BpdnSolution solve_ripalm(const BpdnInstance& inst, const RipalmConfig& cfg,
                          const Observer& observer = {});

}  // namespace ripalm::bpdn
