#include "gridmarl/marl/mid_policy.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace gridmarl::marl {

MidPolicyEstimate::MidPolicyEstimate(int n_agents, double laplace_prior)
    : counts_(nn::Matrix::Zero(n_agents, n_agents)), prior_(laplace_prior) {
  if (n_agents < 1)
    throw std::invalid_argument("mid policy estimate: need >= 1 agent");
  if (laplace_prior < 0.0)
    throw std::invalid_argument("mid policy estimate: negative prior");
}

void MidPolicyEstimate::record(int acting, int next) {
  counts_(acting, next) += 1.0;
}

nn::Vector MidPolicyEstimate::row(int agent) const {
  const int n = size();
  if (pinned_identity_) {
    nn::Vector r = nn::Vector::Zero(n);
    r[agent] = 1.0;
    return r;
  }
  nn::Vector r = counts_.row(agent).transpose().array() + prior_;
  const double total = r.sum();
  if (total <= 0.0) {
    // Zero prior and no observations yet: fall back to the indicator.
    r = nn::Vector::Zero(n);
    r[agent] = 1.0;
    return r;
  }
  return r / total;
}

nn::Matrix MidPolicyEstimate::matrix() const {
  nn::Matrix m(size(), size());
  for (int i = 0; i < size(); ++i) m.row(i) = row(i).transpose();
  return m;
}

double dependent_soft_value(const nn::Vector& pi_mid_row,
                            const nn::Vector& next_values) {
  if (pi_mid_row.size() != next_values.size())
    throw std::invalid_argument("dependent soft value: width mismatch");
  double v = 0.0;
  for (Eigen::Index j = 0; j < pi_mid_row.size(); ++j) {
    if (pi_mid_row[j] == 0.0) continue;
    v += pi_mid_row[j] * next_values[j];
  }
  return v;
}

double dependent_td_residual(const nn::Vector& pi_mid_row, double reward,
                             double gamma, const nn::Vector& next_values,
                             double own_value) {
  const double averaged = dependent_soft_value(pi_mid_row, next_values);
  return reward + gamma * averaged - own_value;
}

std::vector<int> capa_order(const grid::GridSpec& spec,
                            const env::Observation& obs,
                            const std::vector<SubstationAgentSpec>& specs) {
  std::vector<double> key(specs.size(), 0.0);
  for (std::size_t a = 0; a < specs.size(); ++a) {
    double max_rho = 0.0;
    for (int li = 0; li < spec.n_lines(); ++li) {
      const auto& line = spec.lines[li];
      if (line.from_substation != specs[a].substation &&
          line.to_substation != specs[a].substation)
        continue;
      if (li < obs.rho.size()) max_rho = std::max(max_rho, obs.rho[li]);
    }
    key[a] = max_rho;
  }
  std::vector<int> order(specs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (key[static_cast<std::size_t>(a)] != key[static_cast<std::size_t>(b)])
      return key[static_cast<std::size_t>(a)] > key[static_cast<std::size_t>(b)];
    return specs[static_cast<std::size_t>(a)].substation <
           specs[static_cast<std::size_t>(b)].substation;
  });
  return order;
}

std::vector<int> fixed_order(const grid::GridSpec& spec,
                             const std::vector<SubstationAgentSpec>& specs) {
  std::vector<int> order(specs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const int size_a =
        spec.substation_element_count(specs[static_cast<std::size_t>(a)].substation);
    const int size_b =
        spec.substation_element_count(specs[static_cast<std::size_t>(b)].substation);
    if (size_a != size_b) return size_a > size_b;
    return specs[static_cast<std::size_t>(a)].substation <
           specs[static_cast<std::size_t>(b)].substation;
  });
  return order;
}

std::vector<int> random_order(const std::vector<SubstationAgentSpec>& specs,
                              Rng& rng) {
  std::vector<int> order(specs.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  return order;
}

bool is_unsafe(const env::Observation& obs, double rho_thresh) {
  for (std::size_t li = 0; li < obs.topology.line_in_service.size(); ++li) {
    if (!obs.topology.line_in_service[li]) continue;
    if (obs.rho[static_cast<Eigen::Index>(li)] > rho_thresh) return true;
  }
  return false;
}

}  // namespace gridmarl::marl
