#include "gridmarl/marl/actions.hpp"

#include <stdexcept>

namespace gridmarl::marl {

std::vector<env::Action> enumerate_actions(const grid::GridSpec& spec,
                                           int substation) {
  const auto elements = spec.substation_elements(substation);
  const int n = static_cast<int>(elements.size());
  if (n < 2)
    throw std::invalid_argument(
        "enumerate_actions: substation needs at least 2 elements");

  std::vector<env::Action> actions;
  // Slot 0 pinned to bus 1; remaining slots enumerate 2^(n-1) assignments.
  for (int mask = 0; mask < (1 << (n - 1)); ++mask) {
    env::Action action;
    action.substation = substation;
    action.bus_config.assign(static_cast<std::size_t>(n), 1);
    for (int k = 1; k < n; ++k)
      if (mask & (1 << (k - 1))) action.bus_config[static_cast<std::size_t>(k)] = 2;

    bool line_on_bus[3] = {false, false, false};
    bool unit_on_bus[3] = {false, false, false};
    for (int k = 0; k < n; ++k) {
      const int bus = action.bus_config[static_cast<std::size_t>(k)];
      const auto kind = elements[static_cast<std::size_t>(k)].kind;
      if (kind == grid::ElementKind::line_from ||
          kind == grid::ElementKind::line_to)
        line_on_bus[bus] = true;
      else
        unit_on_bus[bus] = true;
    }
    // Isolation-safe by construction: a bus carrying a generator or load
    // must also carry a line endpoint.
    bool legal = true;
    for (int bus = 1; bus <= 2; ++bus)
      if (unit_on_bus[bus] && !line_on_bus[bus]) legal = false;
    if (legal) actions.push_back(std::move(action));
  }
  return actions;
}

std::vector<SubstationAgentSpec> build_agent_specs(const grid::GridSpec& spec) {
  std::vector<SubstationAgentSpec> specs;
  for (int s = 0; s < spec.n_substations(); ++s) {
    if (spec.substation_element_count(s) < kMinAgentSubstationSize) continue;
    SubstationAgentSpec agent;
    agent.agent_index = static_cast<int>(specs.size());
    agent.substation = s;
    agent.actions = enumerate_actions(spec, s);
    specs.push_back(std::move(agent));
  }
  return specs;
}

std::vector<env::Action> union_action_space(
    const std::vector<SubstationAgentSpec>& specs) {
  std::vector<env::Action> actions;
  actions.push_back(env::Action::do_nothing());
  for (const auto& spec : specs)
    for (const auto& action : spec.actions) actions.push_back(action);
  return actions;
}

}  // namespace gridmarl::marl
