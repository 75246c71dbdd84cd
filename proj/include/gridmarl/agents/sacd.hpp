#pragma once

#include <memory>

#include "gridmarl/agents/buffers.hpp"
#include "gridmarl/agents/hyperparams.hpp"
#include "gridmarl/nn/layers.hpp"
#include "gridmarl/nn/optim.hpp"

namespace gridmarl::agents {

// Soft state value V = pi^T [Q - alpha * log(pi)]; entries with pi == 0
// contribute exactly zero.
double sacd_soft_state_value(const nn::Vector& probs, const nn::Vector& q,
                             double alpha);
// Row-wise batch variant with precomputed (finite) log-probabilities.
nn::Vector sacd_soft_state_values(const nn::Matrix& probs,
                                  const nn::Matrix& log_probs,
                                  const nn::Matrix& q, double alpha);

// Loss builders shared by the agent and by the gradient-check suite. All
// "constant" inputs (targets, detached q, detached probabilities) carry no
// gradient.

// J_Q = sum over critic heads of mean(0.5 * (Q(s,a) - y)^2).
nn::Var sacd_critic_loss_term(nn::Tape& tape,
                              const std::vector<nn::Var>& q_heads,
                              const std::vector<int>& actions,
                              const nn::Vector& targets);

// J_pi = mean over batch of pi^T [alpha * log(pi) - Q_detached].
nn::Var sacd_actor_loss_term(nn::Tape& tape, nn::Var probs, nn::Var log_probs,
                             nn::Var q_detached, double alpha);

// J(alpha) = mean over batch of pi^T [-alpha (log(pi) + H_bar)], optimized
// through log-alpha so the temperature stays positive.
nn::Var sacd_temperature_loss_term(nn::Tape& tape, nn::Var alpha_var,
                                   const nn::Matrix& probs,
                                   const nn::Matrix& log_probs,
                                   double target_entropy);

struct SacdUpdateMetrics {
  bool updated = false;
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double temperature_loss = 0.0;
  double alpha = 0.0;
  double entropy = 0.0;
};

// One SACD learner: shared-trunk GNN network, twin critics with targets,
// auto-tuned temperature, and a uniform replay buffer.
class SacdAgent {
 public:
  SacdAgent(int obs_width, int n_actions, const HyperParams& hp,
            std::uint64_t init_seed);

  int select_action(const nn::GraphBatch& s, Rng& rng);
  int greedy_action(const nn::GraphBatch& s);

  // Soft state values under the agent's own current policy and target
  // critic (min over twin heads), one value per batch sample.
  nn::Vector soft_values(const nn::GraphBatch& batch);

  // One gradient step on critic(s), actor and temperature for the given
  // encoded batch and externally supplied TD targets, followed by a target
  // soft update.
  SacdUpdateMetrics gradient_step(const nn::GraphBatch& s_batch,
                                  const std::vector<int>& actions,
                                  const nn::Vector& targets);

  double alpha() const {
    return std::exp(temperature_.at("log_alpha").value(0, 0));
  }
  double target_entropy() const { return target_entropy_; }
  ReplayBuffer& replay() { return replay_; }
  const ReplayBuffer& replay() const { return replay_; }
  nn::SacdNetwork& network() { return *net_; }
  nn::ParameterSet& temperature() { return temperature_; }
  nn::Tensor& log_alpha() { return temperature_.at("log_alpha"); }
  const HyperParams& hyper() const { return hp_; }

 private:
  HyperParams hp_;
  std::unique_ptr<nn::SacdNetwork> net_;
  nn::ParameterSet temperature_;
  nn::Adam optimizer_;
  ReplayBuffer replay_;
  double target_entropy_;
};

}  // namespace gridmarl::agents
