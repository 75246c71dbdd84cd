#pragma once

#include <string>

namespace gridmarl::agents {

// Every tunable scalar of the four algorithm presets, plus the shared
// hierarchy threshold. Presets carry the published tuned values; anything
// can be overridden through the config file.
struct HyperParams {
  double gamma = 0.99;
  double learning_rate = 1e-3;

  // SACD
  int batch_size = 64;
  double update_start_thousands = 4.0;  // env interactions (x1000) before updates
  double target_entropy_scale = 0.98;   // H_bar = scale * ln(n_actions)
  double tau = 0.001;
  double initial_alpha = 1.0;
  bool twin_critics = true;
  int replay_capacity = 50000;

  // PPO
  int minibatches = 4;
  int minibatch_size = 32;
  int ppo_epochs = 4;
  double clip_epsilon = 0.2;
  double vf_coeff = 0.5;
  double entropy_coeff = 0.01;
  double gae_lambda = 0.95;
  bool normalize_advantages = true;

  // hierarchy
  double rho_thresh = 0.95;

  // network
  int gnn_width = 128;

  int horizon() const { return minibatches * minibatch_size; }
  int update_start_interactions() const {
    return static_cast<int>(update_start_thousands * 1000.0);
  }

  void validate() const;

  static HyperParams table_ppo();
  static HyperParams table_mappo();
  static HyperParams table_sacd();
  static HyperParams table_masacd();
};

}  // namespace gridmarl::agents
