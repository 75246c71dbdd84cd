#pragma once

#include "gridmarl/nn/encoding.hpp"
#include "gridmarl/nn/tape.hpp"
#include "gridmarl/nn/tensor.hpp"
#include "gridmarl/util/rng.hpp"

namespace gridmarl::nn {

constexpr double kLeakySlope = 0.01;

// Semi-orthogonal init: QR of a Gaussian matrix with the R-diagonal sign
// fix, which lands entries at the 1/sqrt(fan-in) scale.
Matrix orthogonal_init(int rows, int cols, Rng& rng);

// Binds parameters onto a tape, either as gradient leaves or as constant
// views (target evaluation, action selection).
class Binder {
 public:
  Binder(Tape& tape, bool with_grad) : tape_(tape), with_grad_(with_grad) {}
  Var operator()(Tensor& t) {
    return with_grad_ ? tape_.leaf(t) : tape_.constant_view(t.value);
  }

 private:
  Tape& tape_;
  bool with_grad_;
};

// Graph attention block:
//   h'_i = act(W_self h_i + sum_{j in N(i)} alpha_ij W_msg h_j + bias)
//   alpha_ij = softmax_{j in N(i)} leaky_relu(a_self.(W_self h_i)
//                                             + a_msg.(W_msg h_j))
// plus a residual connection when input and output widths match. Isolated
// nodes receive only the self term. Parameter names use the given prefix:
// {w_self, w_msg, bias, a_self, a_msg}.
void add_gnn_block_params(ParameterSet& set, const std::string& prefix,
                          int in_width, int out_width, Rng& rng);
Var gnn_block(Tape& tape, Var h, const GraphBatch& graph, Binder& bind,
              ParameterSet& set, const std::string& prefix);

// Stack of gnn blocks named "<prefix>b0." .. "<prefix>b{n-1}.".
void add_gnn_stack_params(ParameterSet& set, const std::string& prefix,
                          int in_width, int width, int blocks, Rng& rng);
Var run_gnn_stack(Tape& tape, Var h, const GraphBatch& graph, Binder& bind,
                  ParameterSet& set, const std::string& prefix, int blocks);

// Dense head params: "<prefix>w" (in x out) and "<prefix>b" (1 x out).
void add_dense_params(ParameterSet& set, const std::string& prefix,
                      int in_width, int out_width, Rng& rng);
Var run_dense(Tape& tape, Var x, Binder& bind, ParameterSet& set,
              const std::string& prefix);

// SACD network: shared trunk of 3 gnn blocks, a 3-block actor head and a
// 1-block critic head (twin q heads by default), each followed by a mean
// pool over nodes and a dense output of action-space width.
class SacdNetwork {
 public:
  SacdNetwork(int in_width, int width, int n_actions, bool twin_critics,
              Rng& rng);

  struct Forward {
    Var probs;
    Var log_probs;
    std::vector<Var> q;  // one entry per critic head, each n_samples x A
  };
  Forward forward(Tape& tape, const GraphBatch& graph, bool with_grad);

  // Target-network q values (no gradients), one matrix per critic head.
  std::vector<Matrix> target_q(const GraphBatch& graph);
  // Online policy probabilities and log-probabilities (no gradients).
  std::pair<Matrix, Matrix> policy(const GraphBatch& graph);

  void soft_update_targets(double tau);

  int n_actions() const { return n_actions_; }
  int n_critics() const { return twin_ ? 2 : 1; }

  ParameterSet shared;
  ParameterSet actor;
  ParameterSet critic;
  ParameterSet target_shared;
  ParameterSet target_critic;

 private:
  Var critic_head(Tape& tape, Var trunk, const GraphBatch& graph,
                  Binder& bind, ParameterSet& set, const std::string& name);
  int n_actions_;
  bool twin_;
};

// PPO network: 3 gnn blocks in each of actor and critic, mean pool, dense
// output (action width for the actor, scalar for the critic).
class PpoNetwork {
 public:
  PpoNetwork(int in_width, int width, int n_actions, Rng& rng);

  struct ActorForward {
    Var probs;
    Var log_probs;
  };
  ActorForward forward_actor(Tape& tape, const GraphBatch& graph,
                             bool with_grad);
  Var forward_value(Tape& tape, const GraphBatch& graph, bool with_grad);

  std::pair<Matrix, Matrix> policy(const GraphBatch& graph);
  Vector values(const GraphBatch& graph);

  int n_actions() const { return n_actions_; }

  ParameterSet actor;
  ParameterSet critic;

 private:
  int n_actions_;
};

// Elementwise target <- tau * source + (1 - tau) * target. Throws on
// structure mismatch.
void soft_update_target(const ParameterSet& source, ParameterSet& target,
                        double tau);

}  // namespace gridmarl::nn
