#include "gridmarl/agents/ppo.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gridmarl::agents {

using nn::Matrix;
using nn::Tape;
using nn::Var;
using nn::Vector;

Var ppo_clip_objective(Tape& tape, Var log_probs,
                       const std::vector<int>& actions,
                       const Vector& old_log_probs, const Vector& advantages,
                       double eps) {
  if (old_log_probs.size() == 0)
    throw std::invalid_argument("ppo clip: missing old log-probs");
  Var logp_new = gather_per_row(tape, log_probs, actions);
  Var ratio = exp_elem(
      tape, sub(tape, logp_new, tape.constant(old_log_probs)));
  Var adv = tape.constant(advantages);
  Var unclipped = mul(tape, ratio, adv);
  Var clipped =
      mul(tape, clamp_elem(tape, ratio, 1.0 - eps, 1.0 + eps), adv);
  return mean_all(tape, min_elem(tape, unclipped, clipped));
}

Var ppo_value_loss_term(Tape& tape, Var values, const Vector& targets) {
  return mean_all(tape,
                  square(tape, sub(tape, values, tape.constant(targets))));
}

Var ppo_entropy_term(Tape& tape, Var probs, Var log_probs) {
  return neg(tape,
             mean_all(tape, rowwise_sum(tape, mul(tape, probs, log_probs))));
}

Var ppo_combined_loss_term(Tape& tape, Var clip_objective, Var value_loss,
                           Var entropy, double c1, double c2) {
  return add(tape, neg(tape, clip_objective),
             add(tape, scale(tape, value_loss, c1),
                 scale(tape, entropy, -c2)));
}

PpoAgent::PpoAgent(int obs_width, int n_actions, const HyperParams& hp,
                   std::uint64_t init_seed)
    : hp_(hp), optimizer_(hp.learning_rate), rollout_(hp.horizon()) {
  Rng rng(init_seed);
  net_ =
      std::make_unique<nn::PpoNetwork>(obs_width, hp.gnn_width, n_actions, rng);
}

int PpoAgent::select_action(const nn::GraphBatch& s, Rng& rng,
                            double* log_prob, double* value) {
  const auto [probs, log_probs] = net_->policy(s);
  const int action = rng.sample_categorical(probs.row(0).transpose());
  if (log_prob) *log_prob = log_probs(0, action);
  if (value) *value = net_->values(s)[0];
  return action;
}

int PpoAgent::greedy_action(const nn::GraphBatch& s) {
  const auto [probs, log_probs] = net_->policy(s);
  Eigen::Index best = 0;
  probs.row(0).maxCoeff(&best);
  return static_cast<int>(best);
}

Vector PpoAgent::state_values(const nn::GraphBatch& batch) {
  return net_->values(batch);
}

PpoUpdateMetrics PpoAgent::update(const std::vector<nn::GraphBatch>& encoded,
                                  Rng& shuffle_rng) {
  PpoUpdateMetrics metrics;
  const auto n = rollout_.size();
  if (n == 0) return metrics;
  if (encoded.size() != n)
    throw std::invalid_argument("ppo update: encoding count mismatch");

  rollout_.seal(hp_.gamma, hp_.gae_lambda, hp_.normalize_advantages);
  const Vector& advantages = rollout_.advantages();
  const Vector& targets = rollout_.value_targets();
  const auto& entries = rollout_.entries();

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  const int mb_size = hp_.minibatch_size;
  for (int epoch = 0; epoch < hp_.ppo_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start + 1 <= n; start += static_cast<std::size_t>(mb_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(mb_size));
      const auto count = end - start;
      if (count == 0) break;

      std::vector<const nn::GraphBatch*> parts;
      std::vector<int> actions;
      Vector old_logp(static_cast<Eigen::Index>(count));
      Vector mb_adv(static_cast<Eigen::Index>(count));
      Vector mb_targets(static_cast<Eigen::Index>(count));
      for (std::size_t k = 0; k < count; ++k) {
        const int idx = order[start + k];
        parts.push_back(&encoded[static_cast<std::size_t>(idx)]);
        actions.push_back(entries[static_cast<std::size_t>(idx)].action);
        old_logp[static_cast<Eigen::Index>(k)] =
            entries[static_cast<std::size_t>(idx)].log_prob;
        mb_adv[static_cast<Eigen::Index>(k)] = advantages[idx];
        mb_targets[static_cast<Eigen::Index>(k)] = targets[idx];
      }
      const nn::GraphBatch batch = nn::concat_batches(parts);

      net_->actor.zero_grad();
      net_->critic.zero_grad();
      Tape tape;
      auto actor_fwd = net_->forward_actor(tape, batch, true);
      Var values = net_->forward_value(tape, batch, true);

      Var clip = ppo_clip_objective(tape, actor_fwd.log_probs, actions,
                                    old_logp, mb_adv, hp_.clip_epsilon);
      Var vf = ppo_value_loss_term(tape, values, mb_targets);
      Var entropy =
          ppo_entropy_term(tape, actor_fwd.probs, actor_fwd.log_probs);
      Var total = ppo_combined_loss_term(tape, clip, vf, entropy,
                                         hp_.vf_coeff, hp_.entropy_coeff);
      tape.backward(total, Matrix::Ones(1, 1));
      optimizer_.step({&net_->actor, &net_->critic});

      metrics.updated = true;
      metrics.minibatch_steps += 1;
      metrics.clip_objective = tape.value(clip)(0, 0);
      metrics.value_loss = tape.value(vf)(0, 0);
      metrics.entropy = tape.value(entropy)(0, 0);
      metrics.combined_loss = tape.value(total)(0, 0);
      if (end >= n) break;
    }
  }
  rollout_.clear();
  return metrics;
}

}  // namespace gridmarl::agents
