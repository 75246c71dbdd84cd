#include "gridmarl/grid/grid.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace gridmarl::grid {

std::vector<ElementRef> GridSpec::substation_elements(int substation) const {
  std::vector<ElementRef> out;
  for (int li = 0; li < n_lines(); ++li) {
    if (lines[li].from_substation == substation)
      out.push_back({ElementKind::line_from, li});
    if (lines[li].to_substation == substation)
      out.push_back({ElementKind::line_to, li});
  }
  for (int gi = 0; gi < n_generators(); ++gi)
    if (generators[gi].substation == substation)
      out.push_back({ElementKind::generator, gi});
  for (int di = 0; di < n_loads(); ++di)
    if (loads[di].substation == substation)
      out.push_back({ElementKind::load, di});
  return out;
}

int GridSpec::substation_element_count(int substation) const {
  return static_cast<int>(substation_elements(substation).size());
}

int GridSpec::total_element_count() const {
  return 2 * n_lines() + n_generators() + n_loads();
}

double GridSpec::p_max_sum() const {
  double s = 0.0;
  for (const auto& g : generators) s += g.p_max_mw;
  return s;
}

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument("grid spec: " + msg);
}

template <typename T>
void check_unique_ids(const std::vector<T>& items, const char* what) {
  std::unordered_set<int> seen;
  for (const auto& item : items)
    require(seen.insert(item.id).second,
            std::string("duplicate ") + what + " id");
}

}  // namespace

void validate(const GridSpec& spec) {
  require(!spec.substations.empty(), "no substations");
  check_unique_ids(spec.substations, "substation");
  check_unique_ids(spec.lines, "line");
  check_unique_ids(spec.generators, "generator");
  check_unique_ids(spec.loads, "load");

  auto substation_exists = [&](int s) {
    return s >= 0 && s < spec.n_substations();
  };
  // Substation ids double as indices so referencing code stays flat.
  for (int s = 0; s < spec.n_substations(); ++s)
    require(spec.substations[s].id == s, "substation ids must be 0..n-1");

  for (const auto& line : spec.lines) {
    require(substation_exists(line.from_substation) &&
                substation_exists(line.to_substation),
            "line references unknown substation");
    require(line.from_substation != line.to_substation,
            "line endpoints must differ");
    require(line.reactance > 0.0, "line reactance must be > 0");
    require(line.limit_mw > 0.0, "line thermal limit must be > 0");
  }
  for (const auto& gen : spec.generators) {
    require(substation_exists(gen.substation),
            "generator references unknown substation");
    require(gen.p_max_mw > 0.0, "generator p_max must be > 0");
  }
  for (const auto& load : spec.loads)
    require(substation_exists(load.substation),
            "load references unknown substation");

  // Connectivity with every line in service.
  std::vector<int> root(spec.substations.size());
  for (std::size_t i = 0; i < root.size(); ++i) root[i] = static_cast<int>(i);
  auto find = [&](int x) {
    while (root[x] != x) x = root[x] = root[root[x]];
    return x;
  };
  for (const auto& line : spec.lines)
    root[find(line.from_substation)] = find(line.to_substation);
  for (int s = 1; s < spec.n_substations(); ++s)
    require(find(s) == find(0), "grid is not connected");
}

int Topology::bus_of(const ElementRef& el) const {
  switch (el.kind) {
    case ElementKind::line_from:
      return line_from_bus[el.index];
    case ElementKind::line_to:
      return line_to_bus[el.index];
    case ElementKind::generator:
      return gen_bus[el.index];
    case ElementKind::load:
      return load_bus[el.index];
  }
  return 1;
}

void Topology::set_bus(const ElementRef& el, int bus) {
  switch (el.kind) {
    case ElementKind::line_from:
      line_from_bus[el.index] = bus;
      break;
    case ElementKind::line_to:
      line_to_bus[el.index] = bus;
      break;
    case ElementKind::generator:
      gen_bus[el.index] = bus;
      break;
    case ElementKind::load:
      load_bus[el.index] = bus;
      break;
  }
}

Topology reference_topology(const GridSpec& spec) {
  Topology t;
  t.line_from_bus = Eigen::VectorXi::Ones(spec.n_lines());
  t.line_to_bus = Eigen::VectorXi::Ones(spec.n_lines());
  t.gen_bus = Eigen::VectorXi::Ones(spec.n_generators());
  t.load_bus = Eigen::VectorXi::Ones(spec.n_loads());
  t.line_in_service.assign(static_cast<std::size_t>(spec.n_lines()), 1);
  t.reconnect_cooldown.assign(static_cast<std::size_t>(spec.n_lines()), 0);
  t.overload_steps.assign(static_cast<std::size_t>(spec.n_lines()), 0);
  return t;
}

ElectricalGraph build_electrical_graph(const GridSpec& spec,
                                       const Topology& topo,
                                       const Injections& inj) {
  if (inj.gen_mw.size() != spec.n_generators() ||
      inj.load_mw.size() != spec.n_loads())
    throw std::invalid_argument(
        "injections must cover every generator and load");

  ElectricalGraph g;
  // node slots indexed by substation*2 + (bus-1); -1 = absent
  std::vector<int> slot(static_cast<std::size_t>(spec.n_substations()) * 2, -1);
  auto mark = [&](int substation, int bus) {
    slot[static_cast<std::size_t>(substation) * 2 + (bus - 1)] = 0;
  };
  for (int li = 0; li < spec.n_lines(); ++li) {
    mark(spec.lines[li].from_substation, topo.line_from_bus[li]);
    mark(spec.lines[li].to_substation, topo.line_to_bus[li]);
  }
  for (int gi = 0; gi < spec.n_generators(); ++gi)
    mark(spec.generators[gi].substation, topo.gen_bus[gi]);
  for (int di = 0; di < spec.n_loads(); ++di)
    mark(spec.loads[di].substation, topo.load_bus[di]);

  for (int s = 0; s < spec.n_substations(); ++s) {
    for (int bus = 1; bus <= 2; ++bus) {
      auto& entry = slot[static_cast<std::size_t>(s) * 2 + (bus - 1)];
      if (entry == 0) {
        entry = g.n_nodes();
        g.nodes.push_back({s, bus});
      }
    }
  }

  const int n = g.n_nodes();
  g.node_gen_mw = Eigen::VectorXd::Zero(n);
  g.node_load_mw = Eigen::VectorXd::Zero(n);
  g.node_gen_count = Eigen::VectorXi::Zero(n);
  g.node_load_count = Eigen::VectorXi::Zero(n);
  g.node_of_gen.resize(static_cast<std::size_t>(spec.n_generators()));
  g.node_of_load.resize(static_cast<std::size_t>(spec.n_loads()));

  auto node_at = [&](int substation, int bus) {
    return slot[static_cast<std::size_t>(substation) * 2 + (bus - 1)];
  };

  for (int gi = 0; gi < spec.n_generators(); ++gi) {
    const int node = node_at(spec.generators[gi].substation, topo.gen_bus[gi]);
    g.node_of_gen[static_cast<std::size_t>(gi)] = node;
    g.node_gen_mw[node] += inj.gen_mw[gi];
    g.node_gen_count[node] += 1;
  }
  for (int di = 0; di < spec.n_loads(); ++di) {
    const int node = node_at(spec.loads[di].substation, topo.load_bus[di]);
    g.node_of_load[static_cast<std::size_t>(di)] = node;
    g.node_load_mw[node] += inj.load_mw[di];
    g.node_load_count[node] += 1;
  }
  for (int li = 0; li < spec.n_lines(); ++li) {
    if (!topo.line_in_service[static_cast<std::size_t>(li)]) continue;
    const auto& line = spec.lines[li];
    g.edges.push_back({li, node_at(line.from_substation, topo.line_from_bus[li]),
                       node_at(line.to_substation, topo.line_to_bus[li]),
                       line.reactance, line.limit_mw});
  }
  g.n_lines = spec.n_lines();
  g.injection_mw = g.node_gen_mw - g.node_load_mw;
  return g;
}

std::pair<Eigen::VectorXi, int> ElectricalGraph::components() const {
  const int n = n_nodes();
  std::vector<int> root(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) root[static_cast<std::size_t>(i)] = i;
  auto find = [&](int x) {
    while (root[static_cast<std::size_t>(x)] != x)
      x = root[static_cast<std::size_t>(x)] =
          root[static_cast<std::size_t>(root[static_cast<std::size_t>(x)])];
    return x;
  };
  for (const auto& e : edges) root[static_cast<std::size_t>(find(e.from_node))] = find(e.to_node);

  Eigen::VectorXi comp = Eigen::VectorXi::Constant(n, -1);
  int count = 0;
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (comp[r] < 0) comp[r] = count++;
    comp[i] = comp[r];
  }
  return {comp, count};
}

PowerFlowResult solve_dc_power_flow(const ElectricalGraph& g) {
  if (g.n_nodes() == 0)
    throw std::invalid_argument("power flow requires at least one node");

  PowerFlowResult result;
  const int n = g.n_nodes();
  result.node_angle = Eigen::VectorXd::Zero(n);

  int n_lines = g.n_lines;
  for (const auto& e : g.edges) n_lines = std::max(n_lines, e.line + 1);
  result.flow_mw = Eigen::VectorXd::Zero(n_lines);
  result.loading = Eigen::VectorXd::Zero(n_lines);

  auto [comp, n_comp] = g.components();

  Eigen::VectorXd scaled_gen = g.node_gen_mw;
  for (int c = 0; c < n_comp; ++c) {
    double load = 0.0, gen = 0.0;
    bool has_load_element = false, has_gen_element = false;
    for (int i = 0; i < n; ++i) {
      if (comp[i] != c) continue;
      load += g.node_load_mw[i];
      gen += g.node_gen_mw[i];
      if (g.node_load_count[i] > 0) has_load_element = true;
      if (g.node_gen_count[i] > 0) has_gen_element = true;
    }
    if (has_load_element && !has_gen_element) result.feasible = false;
    if (gen <= 0.0) {
      if (load > 0.0) result.feasible = false;
      for (int i = 0; i < n; ++i)
        if (comp[i] == c) scaled_gen[i] = 0.0;
      continue;
    }
    const double factor = load / gen;
    for (int i = 0; i < n; ++i)
      if (comp[i] == c) scaled_gen[i] *= factor;
    result.total_served_mw += load;
  }
  result.total_generation_mw = scaled_gen.sum();

  const Eigen::VectorXd injection = scaled_gen - g.node_load_mw;

  for (int c = 0; c < n_comp; ++c) {
    std::vector<int> members;
    for (int i = 0; i < n; ++i)
      if (comp[i] == c) members.push_back(i);
    const int m = static_cast<int>(members.size());
    if (m == 1) {
      // Degenerate single-node component: feasible only when balanced.
      if (std::abs(injection[members[0]]) > 1e-9) result.feasible = false;
      continue;
    }
    std::vector<int> local(static_cast<std::size_t>(n), -1);
    for (int k = 0; k < m; ++k) local[static_cast<std::size_t>(members[static_cast<std::size_t>(k)])] = k;

    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, m);
    for (const auto& e : g.edges) {
      if (comp[e.from_node] != c) continue;
      const int i = local[static_cast<std::size_t>(e.from_node)];
      const int j = local[static_cast<std::size_t>(e.to_node)];
      const double susceptance = 1.0 / e.reactance;
      b(i, i) += susceptance;
      b(j, j) += susceptance;
      b(i, j) -= susceptance;
      b(j, i) -= susceptance;
    }
    Eigen::VectorXd p(m);
    for (int k = 0; k < m; ++k) p[k] = injection[members[static_cast<std::size_t>(k)]];

    // Reduced system: drop the slack (local node 0) row/column. The reduced
    // Laplacian of a connected component is symmetric positive definite.
    const int r = m - 1;
    Eigen::MatrixXd b_red = b.bottomRightCorner(r, r);
    Eigen::VectorXd p_red = p.tail(r);
    Eigen::LLT<Eigen::MatrixXd> llt(b_red);
    if (llt.info() != Eigen::Success) {
      result.feasible = false;
      continue;
    }
    const Eigen::VectorXd theta_red = llt.solve(p_red);
    for (int k = 1; k < m; ++k)
      result.node_angle[members[static_cast<std::size_t>(k)]] = theta_red[k - 1];
  }

  for (const auto& e : g.edges) {
    const double flow =
        (result.node_angle[e.from_node] - result.node_angle[e.to_node]) /
        e.reactance;
    result.flow_mw[e.line] = flow;
    result.loading[e.line] = std::abs(flow) / e.limit_mw;
  }
  return result;
}

Topology apply_overload_dynamics(const PowerFlowResult& result,
                                 const Topology& topo,
                                 const OverloadParams& params) {
  Topology next = topo;
  const int n_lines = static_cast<int>(topo.line_in_service.size());
  for (int li = 0; li < n_lines; ++li) {
    const auto idx = static_cast<std::size_t>(li);
    if (topo.line_in_service[idx]) {
      const double rho = li < result.loading.size() ? result.loading[li] : 0.0;
      if (rho >= params.hard_overflow) {
        next.line_in_service[idx] = 0;
        next.reconnect_cooldown[idx] = params.reconnect_delay;
        next.overload_steps[idx] = 0;
      } else if (rho > 1.0) {
        next.overload_steps[idx] = topo.overload_steps[idx] + 1;
        if (next.overload_steps[idx] > params.soft_overflow_steps) {
          next.line_in_service[idx] = 0;
          next.reconnect_cooldown[idx] = params.reconnect_delay;
          next.overload_steps[idx] = 0;
        }
      } else {
        next.overload_steps[idx] = 0;
      }
    } else if (topo.reconnect_cooldown[idx] > 0) {
      next.reconnect_cooldown[idx] = topo.reconnect_cooldown[idx] - 1;
      if (next.reconnect_cooldown[idx] == 0) {
        next.line_in_service[idx] = 1;
        next.overload_steps[idx] = 0;
      }
    }
  }
  return next;
}

const char* to_string(FailureCause cause) {
  switch (cause) {
    case FailureCause::network_split:
      return "network-split";
    case FailureCause::isolated_load:
      return "isolated-load";
    case FailureCause::isolated_generator:
      return "isolated-generator";
    case FailureCause::infeasible_flow:
      return "infeasible-flow";
  }
  return "unknown";
}

std::optional<FailureCause> check_game_over(const ElectricalGraph& g,
                                            const PowerFlowResult& result) {
  auto [comp, n_comp] = g.components();
  std::vector<bool> has_gen(static_cast<std::size_t>(n_comp), false);
  std::vector<bool> has_load(static_cast<std::size_t>(n_comp), false);
  for (int i = 0; i < g.n_nodes(); ++i) {
    const auto c = static_cast<std::size_t>(comp[i]);
    if (g.node_gen_count[i] > 0) has_gen[c] = true;
    if (g.node_load_count[i] > 0) has_load[c] = true;
  }

  int supplied_components = 0;
  for (int c = 0; c < n_comp; ++c) {
    const auto idx = static_cast<std::size_t>(c);
    if (has_load[idx] && !has_gen[idx]) return FailureCause::isolated_load;
    if (has_gen[idx] && !has_load[idx]) return FailureCause::isolated_generator;
    if (has_gen[idx] || has_load[idx]) ++supplied_components;
  }
  // Even balanced islands count as a network disconnection.
  if (supplied_components > 1) return FailureCause::network_split;
  if (!result.feasible) return FailureCause::infeasible_flow;
  return std::nullopt;
}

}  // namespace gridmarl::grid
