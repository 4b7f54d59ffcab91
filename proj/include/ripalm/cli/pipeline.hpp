#pragma once

// Warm-started ripALM runs as used by the command-line tool and the
// benchmarks: iBPGM for transport, a short dual ADMM for BPDN. Reported
// times include the warm start.

#include "ripalm/baselines/dadmm.hpp"
#include "ripalm/baselines/ibpgm.hpp"
#include "ripalm/bpdn/bpdn.hpp"
#include "ripalm/core/ripalm.hpp"
#include "ripalm/qrot/solve.hpp"

namespace ripalm::cli {

struct WarmStartInfo {
  bool used = false;
  int iterations = 0;
  double residual = 0.0;
  double seconds = 0.0;
};

struct QrotRunOptions {
  RipalmConfig cfg = default_schedules();
  bool warm_start = true;
  baselines::IbpgmConfig warm;
};

struct QrotRun {
  qrot::QrotSolution solution;
  WarmStartInfo warm;
  double seconds = 0.0;  // warm start + ripALM
};

QrotRun run_qrot_ripalm(const qrot::QrotInstance& inst, const QrotRunOptions& opts,
                        const Observer& observer = {});

struct BpdnRunOptions {
  RipalmConfig cfg = default_schedules();
  bool warm_start = true;
  baselines::AdmmConfig warm = [] {
    baselines::AdmmConfig c;
    c.max_iter = 100;
    c.tol = 1e-3;
    return c;
  }();
};

struct BpdnRun {
  bpdn::BpdnSolution solution;
  WarmStartInfo warm;
  double seconds = 0.0;
};

BpdnRun run_bpdn_ripalm(const bpdn::BpdnInstance& inst, const BpdnRunOptions& opts,
                        const Observer& observer = {});

}  // namespace ripalm::cli
