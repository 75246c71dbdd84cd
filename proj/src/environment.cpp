#include "gridmarl/env/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridmarl::env {

Eigen::VectorXi Observation::topo_vector(const grid::GridSpec& spec) const {
  Eigen::VectorXi v(spec.total_element_count() + spec.n_lines());
  int k = 0;
  for (int s = 0; s < spec.n_substations(); ++s)
    for (const auto& el : spec.substation_elements(s))
      v[k++] = topology.bus_of(el);
  for (int li = 0; li < spec.n_lines(); ++li)
    v[k++] = topology.line_in_service[static_cast<std::size_t>(li)] ? 1 : 0;
  return v;
}

double efficiency_reward(double served_mw, double generation_mw,
                         double floor_ratio) {
  if (generation_mw <= 0.0)
    throw std::domain_error("efficiency_reward: zero generation");
  const double ratio = served_mw / generation_mw;
  const double rescaled = (ratio - floor_ratio) / (1.0 - floor_ratio);
  return std::clamp(rescaled, 0.0, 1.0);
}

Environment::Environment(grid::GridSpec spec)
    : Environment(std::move(spec), Params()) {}

Environment::Environment(grid::GridSpec spec, Params params)
    : spec_(std::move(spec)), params_(params) {
  grid::validate(spec_);
}

grid::Injections Environment::injections_at(int row) const {
  grid::Injections inj;
  inj.load_mw = chronic_->load_mw.row(row).transpose();
  inj.gen_mw = chronic_->gen_mw.row(row).transpose();
  return inj;
}

void Environment::refresh_observation(const grid::PowerFlowResult& result) {
  obs_.rho = result.loading;
  obs_.topology = topo_;
  obs_.timestep = step_;
}

const Observation& Environment::reset(const Chronic& chronic, int start_offset,
                                      int episode_steps) {
  if (start_offset < 0 || start_offset + episode_steps >= chronic.length())
    throw std::invalid_argument("environment reset: window out of range");
  chronic_ = &chronic;
  offset_ = start_offset;
  episode_steps_ = episode_steps;
  step_ = 0;
  survived_ = 0;
  cost_ = 0.0;
  failure_.reset();
  done_ = false;
  topo_ = grid::reference_topology(spec_);

  const grid::Injections inj = injections_at(offset_);
  obs_.gen_mw = inj.gen_mw;
  obs_.load_mw = inj.load_mw;
  const auto graph = grid::build_electrical_graph(spec_, topo_, inj);
  const auto result = grid::solve_dc_power_flow(graph);
  if (!result.feasible || grid::check_game_over(graph, result))
    throw std::runtime_error(
        "environment reset: initial power flow infeasible");
  refresh_observation(result);
  return obs_;
}

StepOutcome Environment::step(const Action& action) {
  if (done_) throw std::logic_error("environment step: episode is done");

  if (!action.is_do_nothing()) {
    if (action.substation < 0 || action.substation >= spec_.n_substations())
      throw std::invalid_argument("environment step: unknown substation");
    const auto elements = spec_.substation_elements(action.substation);
    if (action.bus_config.size() != elements.size())
      throw std::invalid_argument(
          "environment step: bus configuration length mismatch");
    if (action.bus_config[0] != 1)
      throw std::invalid_argument(
          "environment step: first element must stay on bus 1");
    for (std::size_t k = 0; k < elements.size(); ++k) {
      const int bus = action.bus_config[k];
      if (bus != 1 && bus != 2)
        throw std::invalid_argument("environment step: bus must be 1 or 2");
      topo_.set_bus(elements[k], bus);
    }
  }

  step_ += 1;
  const grid::Injections inj = injections_at(offset_ + step_);

  auto graph = grid::build_electrical_graph(spec_, topo_, inj);
  auto result = grid::solve_dc_power_flow(graph);

  const grid::Topology next_topo =
      grid::apply_overload_dynamics(result, topo_, params_.overload);
  if (next_topo.line_in_service != topo_.line_in_service) {
    topo_ = next_topo;
    graph = grid::build_electrical_graph(spec_, topo_, inj);
    result = grid::solve_dc_power_flow(graph);
  } else {
    topo_ = next_topo;
  }

  StepOutcome out;
  out.step_index = step_;
  out.failure = grid::check_game_over(graph, result);

  obs_.gen_mw = inj.gen_mw;
  obs_.load_mw = inj.load_mw;
  refresh_observation(result);

  if (out.failure) {
    out.reward = -1.0;
    done_ = true;
    failure_ = out.failure;
  } else {
    // Congestion loss: DC flow conserves power exactly, so losses are
    // modeled as a penalty on loading above rho_soft.
    double excess_sq = 0.0;
    for (int li = 0; li < result.loading.size(); ++li)
      excess_sq += std::pow(
          std::max(0.0, result.loading[li] - params_.rho_soft), 2);
    const double penalty =
        params_.loss_penalty_coeff * result.total_served_mw * excess_sq;
    const double served = result.total_served_mw - penalty;
    out.reward = efficiency_reward(served, result.total_generation_mw,
                                   params_.reward_floor);
    survived_ = step_;
    cost_ += 1.0 - out.reward;
    if (step_ >= episode_steps_) done_ = true;
  }
  out.done = done_;
  out.obs = obs_;
  return out;
}

std::vector<int> Environment::current_bus_config(int substation) const {
  std::vector<int> config;
  for (const auto& el : spec_.substation_elements(substation))
    config.push_back(topo_.bus_of(el));
  return config;
}

}  // namespace gridmarl::env
