#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gridmarl::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A named parameter: a float64 buffer with an optional gradient buffer of
// the same shape. Shape is (rows, cols); vectors are column matrices.
struct Tensor {
  Matrix value;
  Matrix grad;  // empty until a gradient is accumulated or zero_grad() runs
  bool requires_grad = true;

  Tensor() = default;
  explicit Tensor(Matrix v, bool rg = true)
      : value(std::move(v)), requires_grad(rg) {}

  bool has_grad() const { return grad.size() > 0; }

  void zero_grad() {
    if (requires_grad) grad = Matrix::Zero(value.rows(), value.cols());
  }

  void accumulate_grad(const Matrix& g) {
    if (!requires_grad) return;
    if (grad.size() == 0)
      grad = g;
    else
      grad += g;
  }
};

// Named map of tensors for one network, with a role tag (actor, critic,
// target-critic, shared). Iteration order is insertion order so that
// updates, soft updates and checkpoints all walk parameters identically.
class ParameterSet {
 public:
  ParameterSet() = default;
  explicit ParameterSet(std::string role) : role_(std::move(role)) {}

  Tensor& add(const std::string& name, Matrix value) {
    for (const auto& item : items_)
      if (item.name == name)
        throw std::invalid_argument("parameter set: duplicate name " + name);
    items_.push_back({name, Tensor(std::move(value))});
    return items_.back().tensor;
  }

  Tensor& at(std::string_view name) {
    for (auto& item : items_)
      if (item.name == name) return item.tensor;
    throw std::out_of_range("parameter set: no tensor named " +
                            std::string(name));
  }
  const Tensor& at(std::string_view name) const {
    return const_cast<ParameterSet*>(this)->at(name);
  }
  bool contains(std::string_view name) const {
    for (const auto& item : items_)
      if (item.name == name) return true;
    return false;
  }

  struct Item {
    std::string name;
    Tensor tensor;
  };

  std::vector<Item>& items() { return items_; }
  const std::vector<Item>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  const std::string& role() const { return role_; }
  void set_role(std::string role) { role_ = std::move(role); }

  void zero_grad() {
    for (auto& item : items_) item.tensor.zero_grad();
  }

  bool same_structure(const ParameterSet& other) const {
    if (items_.size() != other.items_.size()) return false;
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (items_[i].name != other.items_[i].name) return false;
      if (items_[i].tensor.value.rows() != other.items_[i].tensor.value.rows())
        return false;
      if (items_[i].tensor.value.cols() != other.items_[i].tensor.value.cols())
        return false;
    }
    return true;
  }

  // Deep copy of values with a new role (used for target networks).
  ParameterSet clone(std::string role) const {
    ParameterSet out(std::move(role));
    for (const auto& item : items_)
      out.add(item.name, item.tensor.value);
    return out;
  }

 private:
  std::string role_;
  std::vector<Item> items_;
};

}  // namespace gridmarl::nn
