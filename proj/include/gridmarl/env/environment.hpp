#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "gridmarl/env/chronics.hpp"
#include "gridmarl/grid/grid.hpp"

namespace gridmarl::env {

// MDP state exposed to agents.
struct Observation {
  Eigen::VectorXd gen_mw;
  Eigen::VectorXd load_mw;
  Eigen::VectorXd rho;  // per line, 0 when out of service
  grid::Topology topology;
  int timestep = 0;

  // Flat topology vector: bus assignment per element in canonical slot
  // order over all substations, followed by one in-service flag per line.
  Eigen::VectorXi topo_vector(const grid::GridSpec& spec) const;
};

// Bus reconfiguration of one substation, or the do-nothing action.
// bus_config is indexed by the substation's canonical element slots, values
// in {1, 2}, with slot 0 pinned to bus 1 (symmetry canonical form).
struct Action {
  int substation = -1;
  std::vector<int> bus_config;

  static Action do_nothing() { return {}; }
  bool is_do_nothing() const { return substation < 0; }
  bool operator==(const Action&) const = default;
};

struct StepOutcome {
  Observation obs;
  double reward = 0.0;
  bool done = false;
  std::optional<grid::FailureCause> failure;
  int step_index = 0;
};

// Rescaled served/generation ratio: 1 at a lossless grid, 0 at the floor.
// Throws std::domain_error when generation is zero.
double efficiency_reward(double served_mw, double generation_mw,
                         double floor_ratio = 0.9);

class Environment {
 public:
  struct Params {
    grid::OverloadParams overload;
    double rho_soft = 0.95;          // congestion threshold for the loss term
    double loss_penalty_coeff = 4.0; // scales the congestion loss, in units
                                     // of total load per unit squared excess
    double reward_floor = 0.9;       // r_min of the reward rescaling
  };

  explicit Environment(grid::GridSpec spec);
  Environment(grid::GridSpec spec, Params params);

  // Starts an episode at the given chronic offset with the reference
  // topology. episode_steps is the number of step() calls a surviving agent
  // performs (kSubEpisodeSteps - 1 rows remain after the reset row).
  // Throws std::runtime_error when the initial flow is infeasible.
  const Observation& reset(const Chronic& chronic, int start_offset,
                           int episode_steps);

  StepOutcome step(const Action& action);

  const Observation& observation() const { return obs_; }
  const grid::GridSpec& spec() const { return spec_; }
  const Params& params() const { return params_; }
  bool done() const { return done_; }
  const std::optional<grid::FailureCause>& last_failure() const {
    return failure_;
  }
  int survival_steps() const { return survived_; }
  double cumulative_cost() const { return cost_; }
  int episode_steps() const { return episode_steps_; }

  // Substation bus configuration currently in force, in canonical slot
  // order (for the identity-action check).
  std::vector<int> current_bus_config(int substation) const;

 private:
  grid::Injections injections_at(int row) const;
  void refresh_observation(const grid::PowerFlowResult& result);

  grid::GridSpec spec_;
  Params params_;
  const Chronic* chronic_ = nullptr;
  int offset_ = 0;
  int episode_steps_ = 0;
  int step_ = 0;
  bool done_ = true;
  int survived_ = 0;
  double cost_ = 0.0;
  std::optional<grid::FailureCause> failure_;
  grid::Topology topo_;
  Observation obs_;
};

}  // namespace gridmarl::env
