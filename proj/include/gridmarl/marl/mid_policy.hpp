#pragma once

#include <vector>

#include "gridmarl/marl/actions.hpp"
#include "gridmarl/nn/tensor.hpp"
#include "gridmarl/util/rng.hpp"

namespace gridmarl::marl {

// Empirical activation matrix pi_mid: counts of "agent j acted right after
// agent i", normalized per row with a Laplace prior. Rows always sum to 1.
class MidPolicyEstimate {
 public:
  explicit MidPolicyEstimate(int n_agents, double laplace_prior = 1.0);

  void record(int acting, int next);
  nn::Vector row(int agent) const;
  nn::Matrix matrix() const;
  const nn::Matrix& counts() const { return counts_; }
  int size() const { return static_cast<int>(counts_.rows()); }

  // Pins every row to the indicator on self (independent-learning targets
  // and the reduction-equivalence checks).
  void pin_identity(bool pinned) { pinned_identity_ = pinned; }
  bool pinned_identity() const { return pinned_identity_; }

 private:
  nn::Matrix counts_;
  double prior_;
  bool pinned_identity_ = false;
};

// V_hat(s') = sum_j p_ij V^j(s'); zero-weight terms are skipped so the
// identity row reproduces the agent's own value bit-for-bit.
double dependent_soft_value(const nn::Vector& pi_mid_row,
                            const nn::Vector& next_values);

// delta^i_t = r + gamma * sum_j p_ij V^j(s') - V^i(s).
double dependent_td_residual(const nn::Vector& pi_mid_row, double reward,
                             double gamma, const nn::Vector& next_values,
                             double own_value);

// Mid-level orderings. All return agent indices into `specs`.
// CAPA: descending max rho over lines incident to the agent's substation,
// ties by ascending substation id.
std::vector<int> capa_order(const grid::GridSpec& spec,
                            const env::Observation& obs,
                            const std::vector<SubstationAgentSpec>& specs);
// Fixed: descending substation element count, ties by ascending id.
std::vector<int> fixed_order(const grid::GridSpec& spec,
                             const std::vector<SubstationAgentSpec>& specs);
// Random: uniform permutation from the run's seeded generator.
std::vector<int> random_order(const std::vector<SubstationAgentSpec>& specs,
                              Rng& rng);

// Safety gate: true iff max rho over in-service lines strictly exceeds the
// threshold (vacuously false with no line in service).
bool is_unsafe(const env::Observation& obs, double rho_thresh);

}  // namespace gridmarl::marl
