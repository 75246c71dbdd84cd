#include "gridmarl/nn/encoding.hpp"

#include <algorithm>

namespace gridmarl::nn {

int observation_feature_width(const grid::GridSpec& spec) {
  return 5 + spec.n_substations();
}

GraphBatch encode_observation(const grid::GridSpec& spec,
                              const env::Observation& obs) {
  grid::Injections inj{obs.gen_mw, obs.load_mw};
  const auto graph = grid::build_electrical_graph(spec, obs.topology, inj);

  GraphBatch batch;
  const int n = graph.n_nodes();
  const int width = observation_feature_width(spec);
  batch.node_features = Matrix::Zero(n, width);
  batch.node_sample.assign(static_cast<std::size_t>(n), 0);
  batch.n_samples = 1;

  std::vector<double> rho_max(static_cast<std::size_t>(n), 0.0);
  std::vector<double> rho_sum(static_cast<std::size_t>(n), 0.0);
  std::vector<int> degree(static_cast<std::size_t>(n), 0);
  for (const auto& e : graph.edges) {
    const double rho = obs.rho.size() > e.line ? obs.rho[e.line] : 0.0;
    for (const int node : {e.from_node, e.to_node}) {
      const auto i = static_cast<std::size_t>(node);
      rho_max[i] = std::max(rho_max[i], rho);
      rho_sum[i] += rho;
      degree[i] += 1;
    }
    batch.edge_src.push_back(e.from_node);
    batch.edge_dst.push_back(e.to_node);
    batch.edge_src.push_back(e.to_node);
    batch.edge_dst.push_back(e.from_node);
  }

  const double pmax = std::max(spec.p_max_sum(), 1e-9);
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    batch.node_features(i, 0) = graph.injection_mw[i] / pmax;
    batch.node_features(i, 1) = rho_max[k];
    batch.node_features(i, 2) =
        degree[k] > 0 ? rho_sum[k] / degree[k] : 0.0;
    batch.node_features(i, 3 + (graph.nodes[k].bus - 1)) = 1.0;
    batch.node_features(i, 5 + graph.nodes[k].substation) = 1.0;
  }
  return batch;
}

GraphBatch concat_batches(const std::vector<const GraphBatch*>& batches) {
  GraphBatch out;
  int total_nodes = 0;
  for (const auto* b : batches) total_nodes += b->n_nodes();
  if (batches.empty()) return out;
  out.node_features = Matrix::Zero(total_nodes, batches[0]->width());
  out.n_samples = 0;
  int node_offset = 0;
  for (const auto* b : batches) {
    out.node_features.middleRows(node_offset, b->n_nodes()) =
        b->node_features;
    for (std::size_t e = 0; e < b->edge_src.size(); ++e) {
      out.edge_src.push_back(b->edge_src[e] + node_offset);
      out.edge_dst.push_back(b->edge_dst[e] + node_offset);
    }
    for (const int s : b->node_sample)
      out.node_sample.push_back(s + out.n_samples);
    out.n_samples += b->n_samples;
    node_offset += b->n_nodes();
  }
  return out;
}

}  // namespace gridmarl::nn
