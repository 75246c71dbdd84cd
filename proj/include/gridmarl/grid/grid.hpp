#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <vector>

namespace gridmarl::grid {

// One connectable element of a substation. Substation elements are the two
// endpoints of each incident line plus the generators and loads attached
// there; the slot order (lines by id, from-end before to-end, then
// generators, then loads) is the canonical order used by Topology vectors
// and bus-configuration actions.
enum class ElementKind { line_from, line_to, generator, load };

struct ElementRef {
  ElementKind kind;
  int index;  // index into GridSpec::lines / generators / loads
  bool operator==(const ElementRef&) const = default;
};

struct GridSpec {
  struct Substation {
    int id;
  };
  struct Line {
    int id;
    int from_substation;
    int to_substation;
    double reactance;  // p.u., > 0
    double limit_mw;   // thermal limit, > 0
  };
  struct Generator {
    int id;
    int substation;
    double p_max_mw;
  };
  struct Load {
    int id;
    int substation;
  };

  std::vector<Substation> substations;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  std::vector<Load> loads;

  int n_substations() const { return static_cast<int>(substations.size()); }
  int n_lines() const { return static_cast<int>(lines.size()); }
  int n_generators() const { return static_cast<int>(generators.size()); }
  int n_loads() const { return static_cast<int>(loads.size()); }

  // Canonical element slots of one substation (see ElementKind).
  std::vector<ElementRef> substation_elements(int substation) const;
  int substation_element_count(int substation) const;
  // Total element slots over all substations (= 2*lines + gens + loads).
  int total_element_count() const;
  double p_max_sum() const;
};

// Throws std::invalid_argument on any structural violation: duplicate ids,
// dangling substation references, nonpositive reactance/limit, or a grid
// that is disconnected with every line in service.
void validate(const GridSpec& spec);

// Mutable bus-assignment state. Bus values are 1 or 2.
struct Topology {
  Eigen::VectorXi line_from_bus;
  Eigen::VectorXi line_to_bus;
  Eigen::VectorXi gen_bus;
  Eigen::VectorXi load_bus;
  std::vector<std::uint8_t> line_in_service;
  std::vector<int> reconnect_cooldown;  // > 0 implies out of service
  std::vector<int> overload_steps;      // consecutive soft-overload counter

  int bus_of(const ElementRef& el) const;
  void set_bus(const ElementRef& el, int bus);
  bool operator==(const Topology&) const = default;
};

Topology reference_topology(const GridSpec& spec);

// Per-element MW setpoints for one time step.
struct Injections {
  Eigen::VectorXd gen_mw;   // per generator index
  Eigen::VectorXd load_mw;  // per load index
};

// Electrical graph derived from (spec, topology, injections). Nodes are
// (substation, bus) pairs with at least one assigned element; edges are the
// in-service lines. Derived deterministically, no free state.
struct ElectricalGraph {
  struct Node {
    int substation;
    int bus;
  };
  struct Edge {
    int line;
    int from_node;
    int to_node;
    double reactance;
    double limit_mw;
  };

  std::vector<Node> nodes;
  std::vector<Edge> edges;
  int n_lines = 0;  // total line count of the spec, including out-of-service
  Eigen::VectorXd node_gen_mw;
  Eigen::VectorXd node_load_mw;
  Eigen::VectorXd injection_mw;  // gen - load per node
  Eigen::VectorXi node_gen_count;
  Eigen::VectorXi node_load_count;
  std::vector<int> node_of_gen;   // generator index -> node
  std::vector<int> node_of_load;  // load index -> node

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }

  // Connected components over in-service edges; returns component id per
  // node and the component count.
  std::pair<Eigen::VectorXi, int> components() const;
};

ElectricalGraph build_electrical_graph(const GridSpec& spec,
                                       const Topology& topo,
                                       const Injections& inj);

struct PowerFlowResult {
  Eigen::VectorXd flow_mw;     // per line, signed from->to, 0 when out of service
  Eigen::VectorXd loading;     // rho = |flow| / limit, 0 when out of service
  Eigen::VectorXd node_angle;  // theta per graph node
  bool feasible = true;
  double total_generation_mw = 0.0;  // after per-component slack scaling
  double total_served_mw = 0.0;      // load carried by supplied components
};

// DC power flow: B * theta = P per connected component, one slack node per
// component, with generation rescaled proportionally per component to match
// component load (distributed slack). Infeasibility (a load in a component
// with no generation, or a degenerate singular system) is reported through
// the feasibility flag, never as an exception.
PowerFlowResult solve_dc_power_flow(const ElectricalGraph& g);

struct OverloadParams {
  double hard_overflow = 2.0;   // rho at which a line trips immediately
  int soft_overflow_steps = 3;  // consecutive rho > 1 steps tolerated
  int reconnect_delay = 12;     // cooldown steps after a trip
};

// Advances protection state by one step: hard trips, soft-overload counters,
// cooldown decrement and automatic reconnection at cooldown zero.
Topology apply_overload_dynamics(const PowerFlowResult& result,
                                 const Topology& topo,
                                 const OverloadParams& params = {});

enum class FailureCause {
  network_split,
  isolated_load,
  isolated_generator,
  infeasible_flow,
};

const char* to_string(FailureCause cause);

// Game-over rule: any isolation of a load or generator, any split that
// scatters supply-relevant nodes over several components (even balanced
// ones), or an infeasible flow.
std::optional<FailureCause> check_game_over(const ElectricalGraph& g,
                                            const PowerFlowResult& result);

}  // namespace gridmarl::grid
