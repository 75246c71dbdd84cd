// Calibration harness for the bundled case-5 grid.
//
// Checks the two properties the default data must satisfy:
//   - calm profile: the do-nothing policy survives every full chronic;
//   - default (stressed) profile: do-nothing dies mid-episode, while a
//     greedy one-step-lookahead expert over the substation action spaces
//     survives much longer (so the stress is fixable by bus splits).
// Prints per-chronic survival and peak loading so limits can be adjusted.

#include <algorithm>
#include <cstdio>
#include <string>

#include "gridmarl/env/chronics.hpp"
#include "gridmarl/grid/grid_io.hpp"
#include "gridmarl/marl/actions.hpp"
#include "gridmarl/marl/mid_policy.hpp"

using namespace gridmarl;

namespace {

struct EpisodeStats {
  int survived = 0;
  double peak_rho = 0.0;
  int unsafe_steps = 0;
  int actions_taken = 0;
};

EpisodeStats run_do_nothing(const grid::GridSpec& spec,
                            const env::Chronic& chronic, int offset,
                            int steps, double rho_thresh) {
  env::Environment e(spec);
  e.reset(chronic, offset, steps);
  EpisodeStats stats;
  while (!e.done()) {
    e.step(env::Action::do_nothing());
    if (!e.observation().rho.size()) continue;
    stats.peak_rho = std::max(stats.peak_rho, e.observation().rho.maxCoeff());
    if (marl::is_unsafe(e.observation(), rho_thresh)) ++stats.unsafe_steps;
  }
  stats.survived = e.survival_steps();
  return stats;
}

double simulated_severity(const env::Environment& base,
                          const env::Action& action) {
  env::Environment copy = base;
  const auto outcome = copy.step(action);
  if (outcome.failure) return 1e9;
  double max_rho = 0.0;
  for (Eigen::Index i = 0; i < outcome.obs.rho.size(); ++i)
    max_rho = std::max(max_rho, outcome.obs.rho[i]);
  return max_rho;
}

EpisodeStats run_greedy_expert(const grid::GridSpec& spec,
                               const env::Chronic& chronic, int offset,
                               int steps, double rho_thresh) {
  const auto agent_specs = marl::build_agent_specs(spec);
  env::Environment e(spec);
  e.reset(chronic, offset, steps);
  EpisodeStats stats;
  while (!e.done()) {
    if (!marl::is_unsafe(e.observation(), rho_thresh)) {
      e.step(env::Action::do_nothing());
      continue;
    }
    ++stats.unsafe_steps;
    double best = simulated_severity(e, env::Action::do_nothing());
    const env::Action* best_action = nullptr;
    for (const auto& agent : agent_specs) {
      for (const auto& action : agent.actions) {
        if (e.current_bus_config(action.substation) == action.bus_config)
          continue;
        const double severity = simulated_severity(e, action);
        if (severity < best - 1e-12) {
          best = severity;
          best_action = &action;
        }
      }
    }
    if (best_action) {
      e.step(*best_action);
      ++stats.actions_taken;
    } else {
      e.step(env::Action::do_nothing());
    }
    if (e.observation().rho.size())
      stats.peak_rho = std::max(stats.peak_rho, e.observation().rho.maxCoeff());
  }
  stats.survived = e.survival_steps();
  return stats;
}

}  // namespace

int main(int argc, char** argv) {
  std::uint64_t seed = 123;
  int chronics_to_check = 6;
  if (argc > 1) seed = std::stoull(argv[1]);
  if (argc > 2) chronics_to_check = std::stoi(argv[2]);

  const auto spec = grid::make_case5();
  const double rho_thresh = 0.95;
  const int steps = env::kFullEpisodeSteps - 1;

  std::printf("== calm profile (do-nothing must survive all %d steps)\n", steps);
  const auto calm = env::generate_chronics(seed, chronics_to_check,
                                           env::kFullEpisodeSteps, spec,
                                           env::calm_profile(spec));
  bool calm_ok = true;
  for (const auto& chronic : calm.chronics) {
    const auto stats = run_do_nothing(spec, chronic, 0, steps, rho_thresh);
    std::printf("  chronic %02d: survived %4d/%d  peak rho %.3f  unsafe steps %d\n",
                chronic.id, stats.survived, steps, stats.peak_rho,
                stats.unsafe_steps);
    calm_ok = calm_ok && stats.survived == steps;
  }

  std::printf("== default (stressed) profile\n");
  const auto stressed = env::generate_chronics(
      seed, chronics_to_check, env::kFullEpisodeSteps, spec,
      env::default_profile(spec));
  int dn_deaths = 0, expert_wins = 0;
  for (const auto& chronic : stressed.chronics) {
    const auto dn = run_do_nothing(spec, chronic, 0, steps, rho_thresh);
    const auto expert =
        run_greedy_expert(spec, chronic, 0, steps, rho_thresh);
    std::printf(
        "  chronic %02d: do-nothing %4d  expert %4d  (peak %.2f, expert acted %d times)\n",
        chronic.id, dn.survived, expert.survived, dn.peak_rho,
        expert.actions_taken);
    if (dn.survived < steps) ++dn_deaths;
    if (expert.survived > dn.survived) ++expert_wins;
  }

  std::printf("calm ok: %s | do-nothing deaths: %d/%d | expert outlives: %d/%d\n",
              calm_ok ? "yes" : "NO", dn_deaths, chronics_to_check,
              expert_wins, chronics_to_check);
  return calm_ok && dn_deaths > 0 && expert_wins > 0 ? 0 : 1;
}
