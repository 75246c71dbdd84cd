#include "gridmarl/agents/hyperparams.hpp"

#include <stdexcept>

namespace gridmarl::agents {

void HyperParams::validate() const {
  if (gamma <= 0.0 || gamma >= 1.0)
    throw std::invalid_argument("hyperparams: gamma must be in (0,1)");
  if (learning_rate <= 0.0)
    throw std::invalid_argument("hyperparams: learning rate must be > 0");
  if (clip_epsilon <= 0.0)
    throw std::invalid_argument("hyperparams: clip epsilon must be > 0");
  if (gae_lambda < 0.0 || gae_lambda > 1.0)
    throw std::invalid_argument("hyperparams: gae lambda must be in [0,1]");
  if (batch_size < 1 || minibatch_size < 1 || minibatches < 1 ||
      ppo_epochs < 1)
    throw std::invalid_argument("hyperparams: batch sizes must be >= 1");
  if (tau <= 0.0 || tau > 1.0)
    throw std::invalid_argument("hyperparams: tau must be in (0,1]");
  if (update_start_thousands < 0.0)
    throw std::invalid_argument("hyperparams: update start must be >= 0");
  if (rho_thresh <= 0.0 || rho_thresh > 1.0)
    throw std::invalid_argument("hyperparams: rho_thresh must be in (0,1]");
  if (initial_alpha <= 0.0)
    throw std::invalid_argument("hyperparams: initial alpha must be > 0");
  if (gnn_width < 1)
    throw std::invalid_argument("hyperparams: gnn width must be >= 1");
}

HyperParams HyperParams::table_ppo() {
  HyperParams hp;
  hp.minibatches = 4;
  hp.minibatch_size = 32;
  hp.gamma = 0.95;
  hp.learning_rate = 0.003;
  hp.vf_coeff = 0.5;
  hp.entropy_coeff = 0.01;
  hp.clip_epsilon = 0.2;
  hp.gae_lambda = 0.95;
  return hp;
}

HyperParams HyperParams::table_mappo() {
  HyperParams hp;
  hp.minibatches = 2;
  hp.minibatch_size = 32;
  hp.gamma = 0.996;
  hp.learning_rate = 0.002;
  hp.vf_coeff = 0.5;
  hp.entropy_coeff = 5e-5;
  hp.clip_epsilon = 0.12;
  hp.gae_lambda = 0.85;
  return hp;
}

HyperParams HyperParams::table_sacd() {
  HyperParams hp;
  hp.batch_size = 64;
  hp.update_start_thousands = 4.0;
  hp.gamma = 0.995;
  hp.learning_rate = 5e-5;
  hp.target_entropy_scale = 0.98;
  hp.tau = 0.001;
  return hp;
}

HyperParams HyperParams::table_masacd() {
  HyperParams hp;
  hp.batch_size = 16;
  hp.update_start_thousands = 3.0;
  hp.gamma = 0.998;
  hp.learning_rate = 0.0002;
  hp.target_entropy_scale = 0.98;
  hp.tau = 0.002;
  return hp;
}

}  // namespace gridmarl::agents
