#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gridmarl/nn/tensor.hpp"

namespace gridmarl::nn {

// Named-tensor archive:
//   bytes 0..7   magic "GMLCP001"
//   bytes 8..15  manifest length, uint64 little-endian
//   manifest     JSON: format_version, meta, per-set tensor index
//   payload      raw float64 little-endian, row-major, in manifest order
// Round-trips are byte-exact.
void save_checkpoint(
    const std::string& path,
    const std::vector<std::pair<std::string, const ParameterSet*>>& sets,
    const nlohmann::json& meta);

// Loads values into pre-built parameter sets; structure (set names, tensor
// names, shapes) must match the file. Returns the stored meta block.
nlohmann::json load_checkpoint(
    const std::string& path,
    const std::vector<std::pair<std::string, ParameterSet*>>& sets);

}  // namespace gridmarl::nn
