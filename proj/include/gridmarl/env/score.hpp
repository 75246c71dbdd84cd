#pragma once

namespace gridmarl::env {

// L2RPN-style rescaled episode score in [-100, 100], measured against the
// do-nothing baseline on the same sub-episode:
//   dies before the baseline          -> [-100, 0)
//   outlives the baseline, dies early -> [0, 80)
//   finishes the episode              -> [80, 100], the last 20 points
//                                         rewarding operational-cost savings
// Costs are cumulative (1 - efficiency_reward) over survived steps.
double l2rpn_score(double agent_steps, double baseline_steps,
                   double episode_steps, double agent_cost,
                   double baseline_cost);

}  // namespace gridmarl::env
