#pragma once

#include <cstddef>
#include <vector>

#include "gridmarl/env/environment.hpp"
#include "gridmarl/nn/tensor.hpp"
#include "gridmarl/util/rng.hpp"

namespace gridmarl::agents {

struct Transition {
  env::Observation s;
  env::Observation s_next;
  int action = 0;  // index into the acting agent's action list
  double reward = 0.0;
  bool done = false;
  int acting_agent = 0;
  int next_agent = -1;  // agent that acted next; -1 on terminal transitions
};

// Uniform-sampling ring buffer.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

  void push(Transition t) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(t));
    } else {
      items_[cursor_] = std::move(t);
    }
    cursor_ = (cursor_ + 1) % capacity_;
  }

  std::size_t size() const { return items_.size(); }
  const Transition& at(std::size_t i) const { return items_[i]; }

  std::vector<int> sample_indices(int batch, Rng& rng) const {
    std::vector<int> idx(static_cast<std::size_t>(batch));
    for (auto& i : idx) i = rng.uniform_int(static_cast<int>(items_.size()));
    return idx;
  }

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<Transition> items_;
};

// Truncated GAE over an agent's own transition stream:
//   delta_t = r_t + gamma * (1 - done_t) * bootstrap_t - value_t
//   A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
// bootstrap_t is the next-state value estimate recorded at collection time
// (for the dependent variants, the pi_mid-weighted average). Returns raw
// advantages and value targets A_t + V(s_t).
std::pair<nn::Vector, nn::Vector> compute_gae(
    const nn::Vector& rewards, const nn::Vector& values,
    const nn::Vector& bootstrap_values, const std::vector<std::uint8_t>& done,
    double gamma, double lambda);

struct RolloutEntry {
  env::Observation s;
  int action = 0;
  double log_prob = 0.0;
  double reward = 0.0;
  double value = 0.0;            // V(s) at collection time
  double bootstrap_value = 0.0;  // next-state value estimate at finalization
  bool done = false;
  int acting_agent = 0;
  int next_agent = -1;
};

class RolloutBuffer {
 public:
  explicit RolloutBuffer(int horizon) : horizon_(horizon) {}

  void push(RolloutEntry e);
  bool full() const { return static_cast<int>(entries_.size()) >= horizon_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<RolloutEntry>& entries() const { return entries_; }

  void seal(double gamma, double lambda, bool normalize_advantages);
  bool sealed() const { return sealed_; }
  // Advantages as used by the policy loss (normalized when configured).
  const nn::Vector& advantages() const;
  const nn::Vector& raw_advantages() const;
  const nn::Vector& value_targets() const;
  void clear();

 private:
  int horizon_;
  bool sealed_ = false;
  std::vector<RolloutEntry> entries_;
  nn::Vector advantages_;
  nn::Vector raw_advantages_;
  nn::Vector value_targets_;
};

}  // namespace gridmarl::agents
