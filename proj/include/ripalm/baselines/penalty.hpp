#pragma once

namespace ripalm::baselines {

/// Residual balancing for ADMM penalties: every `every` iterations the
/// penalty is multiplied by `factor` when primal/dual > ratio and divided by
/// it when primal/dual < 1/ratio, then clamped to [min_sigma, max_sigma].
struct PenaltyRule {
  double ratio = 10.0;
  double factor = 2.0;
  int every = 20;
  double min_sigma = 1e-8;
  double max_sigma = 1e8;
};

double adapt_penalty(double sigma, double primal, double dual, const PenaltyRule& rule = {});

}  // namespace ripalm::baselines
