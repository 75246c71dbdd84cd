#pragma once

#include <string>

#include "gridmarl/grid/grid.hpp"

namespace gridmarl::grid {

// Grid description document: JSON with a schema_version field. Unknown
// fields are rejected so stale configs fail loudly.
GridSpec parse_grid(const std::string& text);
std::string serialize_grid(const GridSpec& spec);

GridSpec load_grid_file(const std::string& path);
void save_grid_file(const std::string& path, const GridSpec& spec);

// The bundled 5-substation grid: 8 lines, 2 generators, 3 loads. Reactances
// and thermal limits are calibrated so that the do-nothing policy survives
// calm chronics and fails stressed ones (see tools/calibrate_case5).
GridSpec make_case5();

}  // namespace gridmarl::grid
