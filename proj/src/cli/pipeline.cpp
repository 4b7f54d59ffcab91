#include "ripalm/cli/pipeline.hpp"

#include <chrono>

namespace ripalm::cli {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

QrotRun run_qrot_ripalm(const qrot::QrotInstance& inst, const QrotRunOptions& opts,
                        const Observer& observer) {
  const auto start = std::chrono::steady_clock::now();
  QrotRun run;
  if (opts.warm_start) {
    const baselines::IbpgmResult warm = baselines::ibpgm_warmstart(inst, opts.warm);
    run.warm = {true, warm.iterations, warm.residuals.res, warm.seconds};
    run.solution = qrot::solve_ripalm(inst, opts.cfg, warm.f, warm.g, warm.plan, observer);
  } else {
    run.solution = qrot::solve_ripalm(inst, opts.cfg, observer);
  }
  run.seconds = seconds_since(start);
  return run;
}

BpdnRun run_bpdn_ripalm(const bpdn::BpdnInstance& inst, const BpdnRunOptions& opts,
                        const Observer& observer) {
  const auto start = std::chrono::steady_clock::now();
  BpdnRun run;
  if (opts.warm_start) {
    const baselines::BpdnAdmmResult warm = baselines::dadmm_bpdn(inst, opts.warm);
    run.warm = {true, warm.report.iterations, warm.residuals.res, warm.report.seconds};
    run.solution =
        bpdn::solve_ripalm(inst, opts.cfg, warm.state.y, warm.state.s, warm.state.t, observer);
  } else {
    run.solution = bpdn::solve_ripalm(inst, opts.cfg, observer);
  }
  run.seconds = seconds_since(start);
  return run;
}

}  // namespace ripalm::cli
