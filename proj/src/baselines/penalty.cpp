#include "ripalm/baselines/penalty.hpp"

#include <algorithm>

namespace ripalm::baselines {

double adapt_penalty(double sigma, double primal, double dual, const PenaltyRule& rule) {
  double next = sigma;
  if (primal > rule.ratio * dual) {
    next = sigma * rule.factor;
  } else if (dual > rule.ratio * primal) {
    next = sigma / rule.factor;
  }
  return std::clamp(next, rule.min_sigma, rule.max_sigma);
}

}  // namespace ripalm::baselines
