#pragma once

#include <vector>

#include "gridmarl/env/environment.hpp"
#include "gridmarl/nn/tensor.hpp"

namespace gridmarl::nn {

// A (possibly batched) graph: node features plus a directed edge list with
// both directions per line. node_sample maps each node to its sample for
// block-diagonal batching and per-sample pooling.
struct GraphBatch {
  Matrix node_features;  // n_nodes x width
  std::vector<int> edge_src;
  std::vector<int> edge_dst;
  std::vector<int> node_sample;
  int n_samples = 1;

  int n_nodes() const { return static_cast<int>(node_features.rows()); }
  int width() const { return static_cast<int>(node_features.cols()); }
};

// Node feature layout, version 1:
//   [0]            net injection MW / sum of generator p_max
//   [1]            max rho over incident in-service lines
//   [2]            mean rho over incident in-service lines
//   [3..4]         bus one-hot (bus 1, bus 2)
//   [5..5+n_subs)  substation one-hot
int observation_feature_width(const grid::GridSpec& spec);

GraphBatch encode_observation(const grid::GridSpec& spec,
                              const env::Observation& obs);

// Block-diagonal concatenation; sample ids are renumbered consecutively.
GraphBatch concat_batches(const std::vector<const GraphBatch*>& batches);

}  // namespace gridmarl::nn
