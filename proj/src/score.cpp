#include "gridmarl/env/score.hpp"

#include <algorithm>
#include <stdexcept>

namespace gridmarl::env {

double l2rpn_score(double agent_steps, double baseline_steps,
                   double episode_steps, double agent_cost,
                   double baseline_cost) {
  if (agent_steps < 0 || baseline_steps < 0 || episode_steps <= 0 ||
      agent_steps > episode_steps || baseline_steps > episode_steps)
    throw std::invalid_argument("l2rpn_score: survival out of range");

  if (baseline_steps == 0.0 && agent_steps == 0.0) return -100.0;
  if (agent_steps < baseline_steps)
    return -100.0 * (1.0 - agent_steps / baseline_steps);
  if (agent_steps < episode_steps)
    return 80.0 * (agent_steps - baseline_steps) /
           (episode_steps - baseline_steps);
  const double saving = (baseline_cost - agent_cost) /
                        std::max(baseline_cost, 1e-9);
  return 80.0 + 20.0 * std::clamp(saving, 0.0, 1.0);
}

}  // namespace gridmarl::env
