#pragma once

#include <vector>

#include "gridmarl/env/environment.hpp"
#include "gridmarl/grid/grid.hpp"

namespace gridmarl::marl {

// All legal bus configurations of one substation: element slot 0 pinned to
// bus 1 (symmetry canonical form) and no configuration that leaves a
// generator or load on a bus without a line endpoint. Deterministic
// lexicographic order; the all-bus-1 configuration comes first.
std::vector<env::Action> enumerate_actions(const grid::GridSpec& spec,
                                           int substation);

// One low-level agent: a substation, its action list, and its index in the
// agent roster. Only substations with more than three connected elements
// get an agent.
struct SubstationAgentSpec {
  int agent_index = 0;
  int substation = 0;
  std::vector<env::Action> actions;
};

constexpr int kMinAgentSubstationSize = 4;

std::vector<SubstationAgentSpec> build_agent_specs(const grid::GridSpec& spec);

// Single-agent baseline: the union of every agent substation's action list
// plus an explicit do-nothing, as one action space.
std::vector<env::Action> union_action_space(
    const std::vector<SubstationAgentSpec>& specs);

}  // namespace gridmarl::marl
