#pragma once

#include <memory>

#include "gridmarl/agents/buffers.hpp"
#include "gridmarl/agents/hyperparams.hpp"
#include "gridmarl/nn/layers.hpp"
#include "gridmarl/nn/optim.hpp"

namespace gridmarl::agents {

// Clipped surrogate objective (to maximize):
//   mean(min(r_t A_t, clip(r_t, 1-eps, 1+eps) A_t)),
//   r_t = exp(log pi(a|s) - log pi_old(a|s)).
nn::Var ppo_clip_objective(nn::Tape& tape, nn::Var log_probs,
                           const std::vector<int>& actions,
                           const nn::Vector& old_log_probs,
                           const nn::Vector& advantages, double eps);

// L^VF = mean((V(s) - V_target)^2).
nn::Var ppo_value_loss_term(nn::Tape& tape, nn::Var values,
                            const nn::Vector& targets);

// S = mean policy entropy.
nn::Var ppo_entropy_term(nn::Tape& tape, nn::Var probs, nn::Var log_probs);

// L = -L^CLIP + c1 * L^VF - c2 * S, minimized each iteration.
nn::Var ppo_combined_loss_term(nn::Tape& tape, nn::Var clip_objective,
                               nn::Var value_loss, nn::Var entropy, double c1,
                               double c2);

struct PpoUpdateMetrics {
  bool updated = false;
  double clip_objective = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double combined_loss = 0.0;
  int minibatch_steps = 0;
};

// One PPO learner: separate 3-block GNN actor and critic, a rollout buffer
// of `horizon` own transitions, and epoch/minibatch combined-loss updates.
class PpoAgent {
 public:
  PpoAgent(int obs_width, int n_actions, const HyperParams& hp,
           std::uint64_t init_seed);

  // Samples the policy; returns the action and outputs log pi(a|s), V(s).
  int select_action(const nn::GraphBatch& s, Rng& rng, double* log_prob,
                    double* value);
  int greedy_action(const nn::GraphBatch& s);

  // Critic values per batch sample (for the pi_mid-weighted bootstrap).
  nn::Vector state_values(const nn::GraphBatch& batch);

  // Seals the rollout, runs the configured epochs of minibatch updates on
  // the encoded states, then clears the rollout. `encoded` must align with
  // rollout entries.
  PpoUpdateMetrics update(const std::vector<nn::GraphBatch>& encoded,
                          Rng& shuffle_rng);

  RolloutBuffer& rollout() { return rollout_; }
  const RolloutBuffer& rollout() const { return rollout_; }
  nn::PpoNetwork& network() { return *net_; }
  const HyperParams& hyper() const { return hp_; }

 private:
  HyperParams hp_;
  std::unique_ptr<nn::PpoNetwork> net_;
  nn::Adam optimizer_;
  RolloutBuffer rollout_;
};

}  // namespace gridmarl::agents
