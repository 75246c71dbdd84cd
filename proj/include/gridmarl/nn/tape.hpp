#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "gridmarl/nn/tensor.hpp"

namespace gridmarl::nn {

// Handle to a node on the tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode autodiff over Eigen matrices. Each op appends one node in
// topological order; backward() sweeps ids in reverse, so no explicit
// dependency graph is needed. Parameter leaves are bound by pointer and
// receive their gradients in Tensor::grad.
class Tape {
 public:
  // Receives the node's own handle; reads its accumulated gradient via
  // grad(self) and pushes contributions into its inputs via accumulate().
  using Backward = std::function<void(Tape&, Var self)>;

  // Leaf bound to a parameter tensor (no value copy).
  Var leaf(Tensor& t) {
    Node node;
    node.external = &t.value;
    node.bound = &t;
    node.requires_grad = t.requires_grad;
    return push(std::move(node));
  }

  // Leaf holding a constant (no gradient tracking).
  Var constant(Matrix v) {
    Node node;
    node.owned = std::move(v);
    return push(std::move(node));
  }

  // Constant viewing caller-owned storage; the matrix must outlive the tape.
  Var constant_view(const Matrix& v) {
    Node node;
    node.external = &v;
    return push(std::move(node));
  }

  // Intermediate op result.
  Var make(Matrix value, bool requires_grad, Backward backward) {
    Node node;
    node.owned = std::move(value);
    node.requires_grad = requires_grad;
    if (requires_grad) node.backward = std::move(backward);
    return push(std::move(node));
  }

  const Matrix& value(Var v) const {
    const Node& node = nodes_[static_cast<std::size_t>(v.id)];
    return node.external ? *node.external : node.owned;
  }

  bool requires_grad(Var v) const {
    return nodes_[static_cast<std::size_t>(v.id)].requires_grad;
  }

  const Matrix& grad(Var v) const {
    return nodes_[static_cast<std::size_t>(v.id)].grad;
  }

  // Adds a gradient contribution to a node (no-op for non-grad nodes).
  void accumulate(Var v, const Matrix& g) {
    Node& node = nodes_[static_cast<std::size_t>(v.id)];
    if (!node.requires_grad) return;
    if (node.grad.size() == 0)
      node.grad = g;
    else
      node.grad += g;
  }

  // Backpropagates from root. seed must match the root's shape; for scalar
  // losses pass a 1x1 matrix of 1.
  void backward(Var root, const Matrix& seed) {
    accumulate(root, seed);
    for (int id = root.id; id >= 0; --id) {
      Node& node = nodes_[static_cast<std::size_t>(id)];
      if (!node.requires_grad || node.grad.size() == 0) continue;
      if (node.backward) node.backward(*this, Var{id});
      if (node.bound) node.bound->accumulate_grad(node.grad);
    }
  }

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Matrix owned;
    const Matrix* external = nullptr;
    Matrix grad;
    Tensor* bound = nullptr;
    bool requires_grad = false;
    Backward backward;
  };

  Var push(Node node) {
    nodes_.push_back(std::move(node));
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  std::vector<Node> nodes_;
};

// ---- primitive ops ---------------------------------------------------------

Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);  // elementwise
Var scale(Tape& t, Var a, double s);
Var add_scalar(Tape& t, Var a, double s);
Var neg(Tape& t, Var a);
Var matmul(Tape& t, Var a, Var b);
Var add_rowvec(Tape& t, Var a, Var bias);       // bias is 1 x cols
Var leaky_relu(Tape& t, Var a, double slope);
Var log_elem(Tape& t, Var a);
Var exp_elem(Tape& t, Var a);
Var square(Tape& t, Var a);
Var clamp_elem(Tape& t, Var a, double lo, double hi);
Var min_elem(Tape& t, Var a, Var b);
Var sum_all(Tape& t, Var a);    // 1x1
Var mean_all(Tape& t, Var a);   // 1x1
Var rowwise_sum(Tape& t, Var a);  // n x 1

// Row softmax / log-softmax (numerically stable, shared shift).
Var softmax_rows(Tape& t, Var a);
Var log_softmax_rows(Tape& t, Var a);

// Gather rows: out.row(k) = a.row(index[k]).
Var gather_rows(Tape& t, Var a, std::vector<int> index);
// Scatter-add rows into n_out rows: out.row(index[k]) += a.row(k).
Var scatter_sum_rows(Tape& t, Var a, std::vector<int> index, int n_out);
// Per-row element pick: out(k, 0) = a(k, column[k]).
Var gather_per_row(Tape& t, Var a, std::vector<int> column);
// Scale row k of a (n x f) by c(k, 0).
Var mul_colvec(Tape& t, Var a, Var c);
// Softmax over score segments: scores is e x 1, segment[k] in [0, n_segments).
Var segment_softmax(Tape& t, Var scores, std::vector<int> segment,
                    int n_segments);
// Mean of rows per segment; empty segments yield zero rows.
Var segment_mean_rows(Tape& t, Var a, std::vector<int> segment,
                      int n_segments);
// Stops gradient flow: a constant copy of the value.
Var detach(Tape& t, Var a);

// dense layer: x * w + bias (bias broadcast over rows).
inline Var dense(Tape& t, Var x, Var w, Var bias) {
  return add_rowvec(t, matmul(t, x, w), bias);
}

}  // namespace gridmarl::nn
