#include <algorithm>

#include "doctest.h"

#include "json.hpp"

#include "gridmarl/grid/grid.hpp"
#include "gridmarl/grid/grid_io.hpp"
#include "gridmarl/util/rng.hpp"

using namespace gridmarl;
using grid::ElementKind;

namespace {

grid::Injections flat_injections(const grid::GridSpec& spec, double gen,
                                 double load) {
  grid::Injections inj;
  inj.gen_mw = Eigen::VectorXd::Constant(spec.n_generators(), gen);
  inj.load_mw = Eigen::VectorXd::Constant(spec.n_loads(), load);
  return inj;
}

}  // namespace

TEST_CASE("case5 grid matches the documented shape") {
  const auto spec = grid::make_case5();
  CHECK(spec.n_substations() == 5);
  CHECK(spec.n_lines() == 8);
  CHECK(spec.n_generators() == 2);
  CHECK(spec.n_loads() == 3);
  int big = 0;
  for (int s = 0; s < 5; ++s)
    if (spec.substation_element_count(s) > 3) ++big;
  CHECK(big == 3);
}

TEST_CASE("grid validation rejects structural violations") {
  auto spec = grid::make_case5();
  SUBCASE("duplicate line id") {
    spec.lines[1].id = spec.lines[0].id;
    CHECK_THROWS_AS(grid::validate(spec), std::invalid_argument);
  }
  SUBCASE("dangling substation reference") {
    spec.generators[0].substation = 99;
    CHECK_THROWS_AS(grid::validate(spec), std::invalid_argument);
  }
  SUBCASE("nonpositive reactance") {
    spec.lines[0].reactance = 0.0;
    CHECK_THROWS_AS(grid::validate(spec), std::invalid_argument);
  }
  SUBCASE("disconnected grid") {
    // sever substation 4 entirely
    spec.lines.erase(
        std::remove_if(spec.lines.begin(), spec.lines.end(),
                       [](const auto& l) {
                         return l.from_substation == 4 || l.to_substation == 4;
                       }),
        spec.lines.end());
    CHECK_THROWS_AS(grid::validate(spec), std::invalid_argument);
  }
}

TEST_CASE("electrical graph: all elements on bus 1 gives one node per substation") {
  const auto spec = grid::make_case5();
  const auto topo = grid::reference_topology(spec);
  const auto g = grid::build_electrical_graph(spec, topo,
                                              flat_injections(spec, 10, 5));
  CHECK(g.n_nodes() == 5);
  CHECK(g.n_edges() == 8);
}

TEST_CASE("electrical graph: moving two elements of substation 0 to bus 2 splits it") {
  const auto spec = grid::make_case5();
  auto topo = grid::reference_topology(spec);
  const auto elements = spec.substation_elements(0);
  REQUIRE(elements.size() >= 3);
  topo.set_bus(elements[1], 2);
  topo.set_bus(elements[2], 2);
  const auto g = grid::build_electrical_graph(spec, topo,
                                              flat_injections(spec, 10, 5));
  CHECK(g.n_nodes() == 6);
}

TEST_CASE("electrical graph: out-of-service lines drop edges, not nodes") {
  const auto spec = grid::make_case5();
  auto topo = grid::reference_topology(spec);
  std::fill(topo.line_in_service.begin(), topo.line_in_service.end(), 0);
  const auto g = grid::build_electrical_graph(spec, topo,
                                              flat_injections(spec, 10, 5));
  CHECK(g.n_edges() == 0);
  CHECK(g.n_nodes() == 5);
}

TEST_CASE("electrical graph construction is pure") {
  const auto spec = grid::make_case5();
  auto topo = grid::reference_topology(spec);
  topo.set_bus(spec.substation_elements(2)[1], 2);
  const auto inj = flat_injections(spec, 12, 7);
  const auto a = grid::build_electrical_graph(spec, topo, inj);
  const auto b = grid::build_electrical_graph(spec, topo, inj);
  CHECK(a.n_nodes() == b.n_nodes());
  CHECK(a.injection_mw == b.injection_mw);
  for (int e = 0; e < a.n_edges(); ++e) {
    CHECK(a.edges[static_cast<std::size_t>(e)].from_node ==
          b.edges[static_cast<std::size_t>(e)].from_node);
    CHECK(a.edges[static_cast<std::size_t>(e)].to_node ==
          b.edges[static_cast<std::size_t>(e)].to_node);
  }
}

TEST_CASE("overload dynamics: hard overload disconnects immediately") {
  const auto spec = grid::make_case5();
  const auto topo = grid::reference_topology(spec);
  grid::PowerFlowResult result;
  result.loading = Eigen::VectorXd::Zero(spec.n_lines());
  result.loading[3] = 2.5;
  const auto next = grid::apply_overload_dynamics(result, topo);
  CHECK_FALSE(next.line_in_service[3]);
  CHECK(next.reconnect_cooldown[3] == 12);
  CHECK(next.line_in_service[0]);
}

TEST_CASE("overload dynamics: soft overload disconnects on the 4th step") {
  // step-by-step simulation oracle: rho held at 1.1
  const auto spec = grid::make_case5();
  auto topo = grid::reference_topology(spec);
  grid::PowerFlowResult result;
  result.loading = Eigen::VectorXd::Zero(spec.n_lines());
  result.loading[1] = 1.1;
  for (int step = 1; step <= 3; ++step) {
    topo = grid::apply_overload_dynamics(result, topo);
    CHECK(topo.line_in_service[1]);
    CHECK(topo.overload_steps[1] == step);
  }
  topo = grid::apply_overload_dynamics(result, topo);
  CHECK_FALSE(topo.line_in_service[1]);
  CHECK(topo.reconnect_cooldown[1] == 12);
}

TEST_CASE("overload dynamics: no overload leaves topology unchanged") {
  const auto spec = grid::make_case5();
  const auto topo = grid::reference_topology(spec);
  grid::PowerFlowResult result;
  result.loading = Eigen::VectorXd::Constant(spec.n_lines(), 0.9);
  const auto next = grid::apply_overload_dynamics(result, topo);
  CHECK(next == topo);
}

TEST_CASE("overload dynamics: idempotent on calm results") {
  const auto spec = grid::make_case5();
  const auto topo = grid::reference_topology(spec);
  grid::PowerFlowResult result;
  result.loading = Eigen::VectorXd::Constant(spec.n_lines(), 0.5);
  const auto once = grid::apply_overload_dynamics(result, topo);
  const auto twice = grid::apply_overload_dynamics(result, once);
  CHECK(once == topo);
  CHECK(twice == once);
}

TEST_CASE("overload dynamics: cooldown counts down and reconnects at zero") {
  const auto spec = grid::make_case5();
  auto topo = grid::reference_topology(spec);
  grid::PowerFlowResult result;
  result.loading = Eigen::VectorXd::Zero(spec.n_lines());
  result.loading[5] = 3.0;
  topo = grid::apply_overload_dynamics(result, topo);
  REQUIRE_FALSE(topo.line_in_service[5]);
  result.loading[5] = 0.0;
  for (int k = 12; k > 1; --k) {
    CHECK(topo.reconnect_cooldown[5] == k);
    topo = grid::apply_overload_dynamics(result, topo);
    if (topo.reconnect_cooldown[5] > 0) CHECK_FALSE(topo.line_in_service[5]);
  }
  topo = grid::apply_overload_dynamics(result, topo);
  CHECK(topo.reconnect_cooldown[5] == 0);
  CHECK(topo.line_in_service[5]);
}

TEST_CASE("game over: load alone on a line-less bus is an isolated load") {
  const auto spec = grid::make_case5();
  auto topo = grid::reference_topology(spec);
  topo.load_bus[0] = 2;  // load 0 alone on bus 2 of its substation
  const auto g = grid::build_electrical_graph(spec, topo,
                                              flat_injections(spec, 10, 5));
  grid::PowerFlowResult result = grid::solve_dc_power_flow(g);
  const auto cause = grid::check_game_over(g, result);
  REQUIRE(cause.has_value());
  CHECK(*cause == grid::FailureCause::isolated_load);
}

TEST_CASE("game over: intact reference topology is healthy") {
  const auto spec = grid::make_case5();
  const auto topo = grid::reference_topology(spec);
  grid::Injections inj;
  inj.gen_mw = Eigen::VectorXd::Zero(2);
  inj.gen_mw << 25.0, 18.0;
  inj.load_mw = Eigen::VectorXd::Zero(3);
  inj.load_mw << 20.0, 13.0, 10.0;
  const auto g = grid::build_electrical_graph(spec, topo, inj);
  const auto result = grid::solve_dc_power_flow(g);
  CHECK(result.feasible);
  CHECK_FALSE(grid::check_game_over(g, result).has_value());
}

TEST_CASE("game over: balanced islands still count as a split (union-find oracle)") {
  // Two-substation grid split into two self-sufficient islands.
  grid::GridSpec spec;
  spec.substations = {{0}, {1}};
  spec.lines = {{0, 0, 1, 0.1, 100.0}};
  spec.generators = {{0, 0, 50.0}, {1, 1, 50.0}};
  spec.loads = {{0, 0}, {1, 1}};
  grid::validate(spec);
  auto topo = grid::reference_topology(spec);
  topo.line_in_service[0] = 0;

  grid::Injections inj;
  inj.gen_mw = Eigen::VectorXd::Constant(2, 10.0);
  inj.load_mw = Eigen::VectorXd::Constant(2, 10.0);
  const auto g = grid::build_electrical_graph(spec, topo, inj);
  const auto result = grid::solve_dc_power_flow(g);

  // oracle: count components holding supply-relevant elements by union-find
  auto [comp, n_comp] = g.components();
  std::vector<int> relevant;
  for (int i = 0; i < g.n_nodes(); ++i)
    if (g.node_gen_count[i] + g.node_load_count[i] > 0)
      relevant.push_back(comp[i]);
  std::sort(relevant.begin(), relevant.end());
  relevant.erase(std::unique(relevant.begin(), relevant.end()),
                 relevant.end());
  REQUIRE(relevant.size() == 2);

  const auto cause = grid::check_game_over(g, result);
  REQUIRE(cause.has_value());
  CHECK(*cause == grid::FailureCause::network_split);
}

TEST_CASE("grid file round-trips and rejects unknown fields") {
  const auto spec = grid::make_case5();
  const std::string text = grid::serialize_grid(spec);
  const auto parsed = grid::parse_grid(text);
  CHECK(parsed.n_substations() == spec.n_substations());
  CHECK(parsed.lines[3].reactance == spec.lines[3].reactance);
  CHECK(parsed.generators[1].p_max_mw == spec.generators[1].p_max_mw);
  CHECK(grid::serialize_grid(parsed) == text);

  SUBCASE("unknown top-level field") {
    nlohmann::json doc = nlohmann::json::parse(text);
    doc["frequency_hz"] = 50;
    CHECK_THROWS_AS(grid::parse_grid(doc.dump()), std::invalid_argument);
  }
  SUBCASE("unknown line field") {
    nlohmann::json doc = nlohmann::json::parse(text);
    doc["lines"][0]["color"] = "red";
    CHECK_THROWS_AS(grid::parse_grid(doc.dump()), std::invalid_argument);
  }
  SUBCASE("wrong schema version") {
    nlohmann::json doc = nlohmann::json::parse(text);
    doc["schema_version"] = 2;
    CHECK_THROWS_AS(grid::parse_grid(doc.dump()), std::invalid_argument);
  }
}

TEST_CASE("bundled grid file matches the built-in instance") {
  const auto spec = grid::make_case5();
  const auto loaded =
      grid::load_grid_file(std::string(GRIDMARL_SOURCE_DIR) + "/data/case5.json");
  CHECK(grid::serialize_grid(loaded) == grid::serialize_grid(spec));
}

TEST_CASE("substation element slots are canonical and complete") {
  const auto spec = grid::make_case5();
  int total = 0;
  for (int s = 0; s < spec.n_substations(); ++s) {
    const auto elements = spec.substation_elements(s);
    total += static_cast<int>(elements.size());
    // lines come first, then generators, then loads
    bool seen_unit = false;
    for (const auto& el : elements) {
      const bool is_line = el.kind == ElementKind::line_from ||
                           el.kind == ElementKind::line_to;
      if (!is_line) seen_unit = true;
      if (is_line) CHECK_FALSE(seen_unit);
    }
  }
  CHECK(total == spec.total_element_count());
}
