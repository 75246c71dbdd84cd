#pragma once

#include <unordered_map>

#include "gridmarl/nn/tensor.hpp"

namespace gridmarl::nn {

// Adam with bias correction. Moment buffers persist across calls, keyed by
// tensor identity; the shared step counter advances once per step() call.
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // One update over every requires-grad tensor of the given sets. Throws
  // std::logic_error when a tensor has no gradient buffer.
  void step(std::vector<ParameterSet*> sets,
            std::vector<Tensor*> extra = {});

  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }
  long step_count() const { return t_; }

 private:
  void update_tensor(Tensor& tensor, double bc1, double bc2);

  struct Moments {
    Matrix m;
    Matrix v;
  };
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::unordered_map<const Tensor*, Moments> moments_;
};

}  // namespace gridmarl::nn
