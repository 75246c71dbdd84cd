#include "gridmarl/nn/layers.hpp"

#include <stdexcept>

namespace gridmarl::nn {

Matrix orthogonal_init(int rows, int cols, Rng& rng) {
  const bool transpose = rows < cols;
  const int r = transpose ? cols : rows;
  const int c = transpose ? rows : cols;
  Matrix gauss(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) gauss(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(gauss);
  Matrix q = qr.householderQ() * Matrix::Identity(r, c);
  const Matrix& qr_mat = qr.matrixQR();
  for (int j = 0; j < c; ++j)
    if (qr_mat(j, j) < 0.0) q.col(j) = -q.col(j);
  return transpose ? Matrix(q.transpose()) : q;
}

void add_gnn_block_params(ParameterSet& set, const std::string& prefix,
                          int in_width, int out_width, Rng& rng) {
  set.add(prefix + "w_self", orthogonal_init(in_width, out_width, rng));
  set.add(prefix + "w_msg", orthogonal_init(in_width, out_width, rng));
  set.add(prefix + "bias", Matrix::Zero(1, out_width));
  set.add(prefix + "a_self", orthogonal_init(out_width, 1, rng));
  set.add(prefix + "a_msg", orthogonal_init(out_width, 1, rng));
}

Var gnn_block(Tape& tape, Var h, const GraphBatch& graph, Binder& bind,
              ParameterSet& set, const std::string& prefix) {
  if (graph.n_nodes() == 0)
    throw std::invalid_argument("gnn_block: empty graph");
  const int n = graph.n_nodes();
  const auto in_width = tape.value(h).cols();

  Var w_self = bind(set.at(prefix + "w_self"));
  Var w_msg = bind(set.at(prefix + "w_msg"));
  Var bias = bind(set.at(prefix + "bias"));

  Var self_term = matmul(tape, h, w_self);
  Var pre;
  if (graph.edge_src.empty()) {
    pre = add_rowvec(tape, self_term, bias);
  } else {
    Var msg_term = matmul(tape, h, w_msg);
    Var a_self = bind(set.at(prefix + "a_self"));
    Var a_msg = bind(set.at(prefix + "a_msg"));
    Var score_self = matmul(tape, self_term, a_self);  // n x 1
    Var score_msg = matmul(tape, msg_term, a_msg);     // n x 1
    Var edge_score = leaky_relu(
        tape,
        add(tape, gather_rows(tape, score_self, graph.edge_dst),
            gather_rows(tape, score_msg, graph.edge_src)),
        kLeakySlope);
    Var alpha = segment_softmax(tape, edge_score, graph.edge_dst, n);
    Var messages =
        mul_colvec(tape, gather_rows(tape, msg_term, graph.edge_src), alpha);
    Var aggregated = scatter_sum_rows(tape, messages, graph.edge_dst, n);
    pre = add_rowvec(tape, add(tape, self_term, aggregated), bias);
  }
  Var out = leaky_relu(tape, pre, kLeakySlope);
  if (in_width == tape.value(out).cols()) out = add(tape, out, h);
  return out;
}

void add_gnn_stack_params(ParameterSet& set, const std::string& prefix,
                          int in_width, int width, int blocks, Rng& rng) {
  for (int b = 0; b < blocks; ++b)
    add_gnn_block_params(set, prefix + "b" + std::to_string(b) + ".",
                         b == 0 ? in_width : width, width, rng);
}

Var run_gnn_stack(Tape& tape, Var h, const GraphBatch& graph, Binder& bind,
                  ParameterSet& set, const std::string& prefix, int blocks) {
  for (int b = 0; b < blocks; ++b)
    h = gnn_block(tape, h, graph, bind, set,
                  prefix + "b" + std::to_string(b) + ".");
  return h;
}

void add_dense_params(ParameterSet& set, const std::string& prefix,
                      int in_width, int out_width, Rng& rng) {
  set.add(prefix + "w", orthogonal_init(in_width, out_width, rng));
  set.add(prefix + "b", Matrix::Zero(1, out_width));
}

Var run_dense(Tape& tape, Var x, Binder& bind, ParameterSet& set,
              const std::string& prefix) {
  return dense(tape, x, bind(set.at(prefix + "w")), bind(set.at(prefix + "b")));
}

namespace {
constexpr int kTrunkBlocks = 3;
constexpr int kActorBlocks = 3;
constexpr int kSacdCriticBlocks = 1;
constexpr int kPpoBlocks = 3;
// Critic q-head output bias starts at the failure reward: actions without
// any experience should read as bad as a game-over, not as unexplored
// zeros, or the greedy policy gravitates to whatever was never tried.
constexpr double kCriticBiasInit = -1.0;
}  // namespace

SacdNetwork::SacdNetwork(int in_width, int width, int n_actions,
                         bool twin_critics, Rng& rng)
    : shared("shared"),
      actor("actor"),
      critic("critic"),
      n_actions_(n_actions),
      twin_(twin_critics) {
  add_gnn_stack_params(shared, "", in_width, width, kTrunkBlocks, rng);
  add_gnn_stack_params(actor, "", width, width, kActorBlocks, rng);
  add_dense_params(actor, "out.", width, n_actions, rng);
  for (int qi = 0; qi < n_critics(); ++qi) {
    const std::string head = "q" + std::to_string(qi + 1) + ".";
    add_gnn_stack_params(critic, head, width, width, kSacdCriticBlocks, rng);
    add_dense_params(critic, head + "out.", width, n_actions, rng);
    critic.at(head + "out.b").value.setConstant(kCriticBiasInit);
  }
  target_shared = shared.clone("target-critic");
  target_critic = critic.clone("target-critic");
}

Var SacdNetwork::critic_head(Tape& tape, Var trunk, const GraphBatch& graph,
                             Binder& bind, ParameterSet& set,
                             const std::string& name) {
  Var h = run_gnn_stack(tape, trunk, graph, bind, set, name,
                        kSacdCriticBlocks);
  Var pooled =
      segment_mean_rows(tape, h, graph.node_sample, graph.n_samples);
  return run_dense(tape, pooled, bind, set, name + "out.");
}

SacdNetwork::Forward SacdNetwork::forward(Tape& tape, const GraphBatch& graph,
                                          bool with_grad) {
  Binder bind(tape, with_grad);
  Var h = tape.constant_view(graph.node_features);
  Var trunk = run_gnn_stack(tape, h, graph, bind, shared, "", kTrunkBlocks);

  Var ah = run_gnn_stack(tape, trunk, graph, bind, actor, "", kActorBlocks);
  Var pooled =
      segment_mean_rows(tape, ah, graph.node_sample, graph.n_samples);
  Var logits = run_dense(tape, pooled, bind, actor, "out.");

  Forward out;
  out.probs = softmax_rows(tape, logits);
  out.log_probs = log_softmax_rows(tape, logits);
  for (int qi = 0; qi < n_critics(); ++qi)
    out.q.push_back(critic_head(tape, trunk, graph, bind, critic,
                                "q" + std::to_string(qi + 1) + "."));
  return out;
}

std::vector<Matrix> SacdNetwork::target_q(const GraphBatch& graph) {
  Tape tape;
  Binder bind(tape, false);
  Var h = tape.constant_view(graph.node_features);
  Var trunk =
      run_gnn_stack(tape, h, graph, bind, target_shared, "", kTrunkBlocks);
  std::vector<Matrix> out;
  for (int qi = 0; qi < n_critics(); ++qi)
    out.push_back(tape.value(critic_head(tape, trunk, graph, bind,
                                         target_critic,
                                         "q" + std::to_string(qi + 1) + ".")));
  return out;
}

std::pair<Matrix, Matrix> SacdNetwork::policy(const GraphBatch& graph) {
  Tape tape;
  auto fwd = forward(tape, graph, false);
  return {tape.value(fwd.probs), tape.value(fwd.log_probs)};
}

void SacdNetwork::soft_update_targets(double tau) {
  soft_update_target(shared, target_shared, tau);
  soft_update_target(critic, target_critic, tau);
}

PpoNetwork::PpoNetwork(int in_width, int width, int n_actions, Rng& rng)
    : actor("actor"), critic("critic"), n_actions_(n_actions) {
  add_gnn_stack_params(actor, "", in_width, width, kPpoBlocks, rng);
  add_dense_params(actor, "out.", width, n_actions, rng);
  add_gnn_stack_params(critic, "", in_width, width, kPpoBlocks, rng);
  add_dense_params(critic, "out.", width, 1, rng);
}

PpoNetwork::ActorForward PpoNetwork::forward_actor(Tape& tape,
                                                   const GraphBatch& graph,
                                                   bool with_grad) {
  Binder bind(tape, with_grad);
  Var h = tape.constant_view(graph.node_features);
  Var stack = run_gnn_stack(tape, h, graph, bind, actor, "", kPpoBlocks);
  Var pooled =
      segment_mean_rows(tape, stack, graph.node_sample, graph.n_samples);
  Var logits = run_dense(tape, pooled, bind, actor, "out.");
  return {softmax_rows(tape, logits), log_softmax_rows(tape, logits)};
}

Var PpoNetwork::forward_value(Tape& tape, const GraphBatch& graph,
                              bool with_grad) {
  Binder bind(tape, with_grad);
  Var h = tape.constant_view(graph.node_features);
  Var stack = run_gnn_stack(tape, h, graph, bind, critic, "", kPpoBlocks);
  Var pooled =
      segment_mean_rows(tape, stack, graph.node_sample, graph.n_samples);
  return run_dense(tape, pooled, bind, critic, "out.");
}

std::pair<Matrix, Matrix> PpoNetwork::policy(const GraphBatch& graph) {
  Tape tape;
  auto fwd = forward_actor(tape, graph, false);
  return {tape.value(fwd.probs), tape.value(fwd.log_probs)};
}

Vector PpoNetwork::values(const GraphBatch& graph) {
  Tape tape;
  return tape.value(forward_value(tape, graph, false)).col(0);
}

void soft_update_target(const ParameterSet& source, ParameterSet& target,
                        double tau) {
  if (!source.same_structure(target))
    throw std::invalid_argument("soft_update_target: structure mismatch");
  for (std::size_t i = 0; i < source.items().size(); ++i) {
    const Matrix& src = source.items()[i].tensor.value;
    Matrix& dst = target.items()[i].tensor.value;
    dst = tau * src + (1.0 - tau) * dst;
  }
}

}  // namespace gridmarl::nn
