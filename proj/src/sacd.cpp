#include "gridmarl/agents/sacd.hpp"

#include <cmath>
#include <stdexcept>

namespace gridmarl::agents {

using nn::Matrix;
using nn::Tape;
using nn::Var;
using nn::Vector;

double sacd_soft_state_value(const Vector& probs, const Vector& q,
                             double alpha) {
  if (probs.size() != q.size())
    throw std::invalid_argument("soft state value: width mismatch");
  double v = 0.0;
  for (Eigen::Index a = 0; a < probs.size(); ++a) {
    if (probs[a] == 0.0) continue;
    v += probs[a] * (q[a] - alpha * std::log(probs[a]));
  }
  return v;
}

Vector sacd_soft_state_values(const Matrix& probs, const Matrix& log_probs,
                              const Matrix& q, double alpha) {
  if (probs.rows() != q.rows() || probs.cols() != q.cols())
    throw std::invalid_argument("soft state values: width mismatch");
  return probs.cwiseProduct(q - alpha * log_probs).rowwise().sum();
}

Var sacd_critic_loss_term(Tape& tape, const std::vector<Var>& q_heads,
                          const std::vector<int>& actions,
                          const Vector& targets) {
  if (q_heads.empty()) throw std::invalid_argument("critic loss: no heads");
  if (targets.size() == 0) throw std::invalid_argument("critic loss: empty batch");
  Var y = tape.constant(targets);
  Var loss;
  for (const Var q : q_heads) {
    Var q_sa = gather_per_row(tape, q, actions);
    Var head_loss =
        scale(tape, mean_all(tape, square(tape, sub(tape, q_sa, y))), 0.5);
    loss = loss.valid() ? add(tape, loss, head_loss) : head_loss;
  }
  return loss;
}

Var sacd_actor_loss_term(Tape& tape, Var probs, Var log_probs, Var q_detached,
                         double alpha) {
  Var inner = sub(tape, scale(tape, log_probs, alpha), q_detached);
  return mean_all(tape, rowwise_sum(tape, mul(tape, probs, inner)));
}

Var sacd_temperature_loss_term(Tape& tape, Var alpha_var, const Matrix& probs,
                               const Matrix& log_probs,
                               double target_entropy) {
  // coefficient = mean over batch of pi^T (log pi + H_bar); the loss is
  // -alpha * coefficient, so d/d(log alpha) = -alpha * coefficient.
  const double coeff =
      probs.cwiseProduct((log_probs.array() + target_entropy).matrix())
          .rowwise()
          .sum()
          .mean();
  return neg(tape, scale(tape, alpha_var, coeff));
}

SacdAgent::SacdAgent(int obs_width, int n_actions, const HyperParams& hp,
                     std::uint64_t init_seed)
    : hp_(hp),
      temperature_("shared"),
      optimizer_(hp.learning_rate),
      replay_(static_cast<std::size_t>(hp.replay_capacity)),
      target_entropy_(hp.target_entropy_scale *
                      std::log(static_cast<double>(n_actions))) {
  Rng rng(init_seed);
  net_ = std::make_unique<nn::SacdNetwork>(obs_width, hp.gnn_width, n_actions,
                                           hp.twin_critics, rng);
  temperature_.add("log_alpha",
                   Matrix::Constant(1, 1, std::log(hp.initial_alpha)));
}

int SacdAgent::select_action(const nn::GraphBatch& s, Rng& rng) {
  const auto [probs, log_probs] = net_->policy(s);
  return rng.sample_categorical(probs.row(0).transpose());
}

int SacdAgent::greedy_action(const nn::GraphBatch& s) {
  const auto [probs, log_probs] = net_->policy(s);
  Eigen::Index best = 0;
  probs.row(0).maxCoeff(&best);
  return static_cast<int>(best);
}

Vector SacdAgent::soft_values(const nn::GraphBatch& batch) {
  const auto [probs, log_probs] = net_->policy(batch);
  const auto q_heads = net_->target_q(batch);
  Matrix q = q_heads[0];
  for (std::size_t h = 1; h < q_heads.size(); ++h)
    q = q.cwiseMin(q_heads[h]);
  return sacd_soft_state_values(probs, log_probs, q, alpha());
}

SacdUpdateMetrics SacdAgent::gradient_step(const nn::GraphBatch& s_batch,
                                           const std::vector<int>& actions,
                                           const Vector& targets) {
  if (actions.empty()) throw std::invalid_argument("gradient step: empty batch");

  net_->shared.zero_grad();
  net_->actor.zero_grad();
  net_->critic.zero_grad();
  temperature_.zero_grad();

  Tape tape;
  auto fwd = net_->forward(tape, s_batch, true);

  Var critic_loss = sacd_critic_loss_term(tape, fwd.q, actions, targets);

  Var q_min = fwd.q[0];
  for (std::size_t h = 1; h < fwd.q.size(); ++h)
    q_min = min_elem(tape, q_min, fwd.q[h]);
  Var q_detached = detach(tape, q_min);
  const double alpha_value = alpha();
  Var actor_loss = sacd_actor_loss_term(tape, fwd.probs, fwd.log_probs,
                                        q_detached, alpha_value);

  Var alpha_var = exp_elem(tape, tape.leaf(log_alpha()));
  Var temperature_loss = sacd_temperature_loss_term(
      tape, alpha_var, tape.value(fwd.probs), tape.value(fwd.log_probs),
      target_entropy_);

  Var total = add(tape, add(tape, critic_loss, actor_loss), temperature_loss);
  tape.backward(total, Matrix::Ones(1, 1));

  SacdUpdateMetrics metrics;
  metrics.updated = true;
  metrics.critic_loss = tape.value(critic_loss)(0, 0);
  metrics.actor_loss = tape.value(actor_loss)(0, 0);
  metrics.temperature_loss = tape.value(temperature_loss)(0, 0);
  metrics.entropy = -tape.value(fwd.probs)
                         .cwiseProduct(tape.value(fwd.log_probs))
                         .rowwise()
                         .sum()
                         .mean();

  optimizer_.step({&net_->shared, &net_->actor, &net_->critic},
                  {&log_alpha()});
  net_->soft_update_targets(hp_.tau);
  metrics.alpha = alpha();
  return metrics;
}

}  // namespace gridmarl::agents
