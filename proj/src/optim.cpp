#include "gridmarl/nn/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace gridmarl::nn {

void Adam::step(std::vector<ParameterSet*> sets, std::vector<Tensor*> extra) {
  t_ += 1;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (ParameterSet* set : sets)
    for (auto& item : set->items())
      if (item.tensor.requires_grad) update_tensor(item.tensor, bc1, bc2);
  for (Tensor* tensor : extra)
    if (tensor->requires_grad) update_tensor(*tensor, bc1, bc2);
}

void Adam::update_tensor(Tensor& tensor, double bc1, double bc2) {
  if (!tensor.has_grad())
    throw std::logic_error("adam step: missing gradients");
  auto& moments = moments_[&tensor];
  if (moments.m.size() == 0) {
    moments.m = Matrix::Zero(tensor.value.rows(), tensor.value.cols());
    moments.v = Matrix::Zero(tensor.value.rows(), tensor.value.cols());
  }
  moments.m = beta1_ * moments.m + (1.0 - beta1_) * tensor.grad;
  moments.v = beta2_ * moments.v +
              (1.0 - beta2_) * tensor.grad.cwiseProduct(tensor.grad);
  const Matrix m_hat = moments.m / bc1;
  const Matrix v_hat = moments.v / bc2;
  tensor.value.array() -=
      lr_ * m_hat.array() / (v_hat.array().sqrt() + eps_);
}

}  // namespace gridmarl::nn
