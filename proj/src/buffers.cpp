#include "gridmarl/agents/buffers.hpp"

#include <cmath>
#include <stdexcept>

namespace gridmarl::agents {

std::pair<nn::Vector, nn::Vector> compute_gae(
    const nn::Vector& rewards, const nn::Vector& values,
    const nn::Vector& bootstrap_values, const std::vector<std::uint8_t>& done,
    double gamma, double lambda) {
  const auto n = rewards.size();
  if (values.size() != n || bootstrap_values.size() != n ||
      static_cast<Eigen::Index>(done.size()) != n)
    throw std::invalid_argument("compute_gae: length mismatch");

  nn::Vector advantages(n);
  double next_advantage = 0.0;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const double not_done = done[static_cast<std::size_t>(t)] ? 0.0 : 1.0;
    const double delta =
        rewards[t] + gamma * not_done * bootstrap_values[t] - values[t];
    advantages[t] = delta + gamma * lambda * not_done * next_advantage;
    next_advantage = advantages[t];
  }
  return {advantages, advantages + values};
}

void RolloutBuffer::push(RolloutEntry e) {
  if (sealed_)
    throw std::logic_error("rollout buffer: push after seal");
  entries_.push_back(std::move(e));
}

void RolloutBuffer::seal(double gamma, double lambda,
                         bool normalize_advantages) {
  const auto n = static_cast<Eigen::Index>(entries_.size());
  nn::Vector rewards(n), values(n), bootstraps(n);
  std::vector<std::uint8_t> done(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& e = entries_[static_cast<std::size_t>(i)];
    rewards[i] = e.reward;
    values[i] = e.value;
    bootstraps[i] = e.bootstrap_value;
    done[static_cast<std::size_t>(i)] = e.done ? 1 : 0;
  }
  std::tie(raw_advantages_, value_targets_) =
      compute_gae(rewards, values, bootstraps, done, gamma, lambda);
  advantages_ = raw_advantages_;
  if (normalize_advantages && n > 1) {
    const double mean = advantages_.mean();
    const double std = std::sqrt(
        (advantages_.array() - mean).square().sum() / static_cast<double>(n));
    advantages_ = (advantages_.array() - mean) / (std + 1e-8);
  }
  sealed_ = true;
}

const nn::Vector& RolloutBuffer::advantages() const {
  if (!sealed_) throw std::logic_error("rollout buffer: not sealed");
  return advantages_;
}

const nn::Vector& RolloutBuffer::raw_advantages() const {
  if (!sealed_) throw std::logic_error("rollout buffer: not sealed");
  return raw_advantages_;
}

const nn::Vector& RolloutBuffer::value_targets() const {
  if (!sealed_) throw std::logic_error("rollout buffer: not sealed");
  return value_targets_;
}

void RolloutBuffer::clear() {
  entries_.clear();
  sealed_ = false;
  advantages_.resize(0);
  raw_advantages_.resize(0);
  value_targets_.resize(0);
}

}  // namespace gridmarl::agents
