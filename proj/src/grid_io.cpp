#include "gridmarl/grid/grid_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace gridmarl::grid {

namespace {

using nlohmann::json;

void reject_unknown_fields(const json& obj,
                           std::initializer_list<const char*> allowed,
                           const char* where) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* name : allowed)
      if (key == name) known = true;
    if (!known)
      throw std::invalid_argument(std::string("grid file: unknown field '") +
                                  key + "' in " + where);
  }
}

}  // namespace

GridSpec parse_grid(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("grid file: ") + e.what());
  }
  reject_unknown_fields(
      doc, {"schema_version", "substations", "lines", "generators", "loads"},
      "document");
  if (!doc.contains("schema_version") || doc["schema_version"] != 1)
    throw std::invalid_argument("grid file: schema_version must be 1");

  GridSpec spec;
  for (const auto& s : doc.at("substations")) {
    reject_unknown_fields(s, {"id"}, "substation");
    spec.substations.push_back({s.at("id").get<int>()});
  }
  for (const auto& l : doc.at("lines")) {
    reject_unknown_fields(l, {"id", "from", "to", "reactance", "limit_mw"},
                          "line");
    spec.lines.push_back({l.at("id").get<int>(), l.at("from").get<int>(),
                          l.at("to").get<int>(),
                          l.at("reactance").get<double>(),
                          l.at("limit_mw").get<double>()});
  }
  for (const auto& g : doc.at("generators")) {
    reject_unknown_fields(g, {"id", "substation", "p_max_mw"}, "generator");
    spec.generators.push_back({g.at("id").get<int>(),
                               g.at("substation").get<int>(),
                               g.at("p_max_mw").get<double>()});
  }
  for (const auto& d : doc.at("loads")) {
    reject_unknown_fields(d, {"id", "substation"}, "load");
    spec.loads.push_back({d.at("id").get<int>(), d.at("substation").get<int>()});
  }
  validate(spec);
  return spec;
}

std::string serialize_grid(const GridSpec& spec) {
  json doc;
  doc["schema_version"] = 1;
  doc["substations"] = json::array();
  for (const auto& s : spec.substations)
    doc["substations"].push_back({{"id", s.id}});
  doc["lines"] = json::array();
  for (const auto& l : spec.lines)
    doc["lines"].push_back({{"id", l.id},
                            {"from", l.from_substation},
                            {"to", l.to_substation},
                            {"reactance", l.reactance},
                            {"limit_mw", l.limit_mw}});
  doc["generators"] = json::array();
  for (const auto& g : spec.generators)
    doc["generators"].push_back(
        {{"id", g.id}, {"substation", g.substation}, {"p_max_mw", g.p_max_mw}});
  doc["loads"] = json::array();
  for (const auto& d : spec.loads)
    doc["loads"].push_back({{"id", d.id}, {"substation", d.substation}});
  return doc.dump(2) + "\n";
}

GridSpec load_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open grid file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_grid(buf.str());
}

void save_grid_file(const std::string& path, const GridSpec& spec) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write grid file: " + path);
  out << serialize_grid(spec);
}

GridSpec make_case5() {
  GridSpec spec;
  spec.substations = {{0}, {1}, {2}, {3}, {4}};
  // Substations 0, 1 and 2 carry 5 elements each and are the controllable
  // ones; 3 and 4 stay at 3 elements. Lines 0 and 7 form a double circuit
  // between the two generator substations.
  spec.lines = {
      {0, 0, 1, 0.06, 32.0},  // gen tie, circuit 1
      {1, 0, 2, 0.08, 26.0},  // main feeder to the load hub
      {2, 0, 3, 0.12, 20.0},
      {3, 1, 2, 0.10, 26.0},
      {4, 1, 4, 0.12, 16.0},
      {5, 2, 3, 0.16, 14.0},
      {6, 2, 4, 0.16, 14.0},
      {7, 0, 1, 0.06, 32.0},  // gen tie, circuit 2
  };
  spec.generators = {{0, 0, 70.0}, {1, 1, 55.0}};
  spec.loads = {{0, 2}, {1, 3}, {2, 4}};
  validate(spec);
  return spec;
}

}  // namespace gridmarl::grid
