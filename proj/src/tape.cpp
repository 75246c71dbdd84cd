#include "gridmarl/nn/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace gridmarl::nn {

namespace {

void check_same_shape(const Tape& t, Var a, Var b, const char* op) {
  const Matrix& x = t.value(a);
  const Matrix& y = t.value(b);
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw std::invalid_argument(
        std::string(op) + ": shape mismatch (" + std::to_string(x.rows()) +
        "x" + std::to_string(x.cols()) + " vs " + std::to_string(y.rows()) +
        "x" + std::to_string(y.cols()) + ")");
}

}  // namespace

Var add(Tape& t, Var a, Var b) {
  check_same_shape(t, a, b, "add");
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return t.make(t.value(a) + t.value(b), rg, [a, b](Tape& t, Var self) {
    t.accumulate(a, t.grad(self));
    t.accumulate(b, t.grad(self));
  });
}

Var sub(Tape& t, Var a, Var b) {
  check_same_shape(t, a, b, "sub");
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return t.make(t.value(a) - t.value(b), rg, [a, b](Tape& t, Var self) {
    t.accumulate(a, t.grad(self));
    t.accumulate(b, -t.grad(self));
  });
}

Var mul(Tape& t, Var a, Var b) {
  check_same_shape(t, a, b, "mul");
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return t.make(t.value(a).cwiseProduct(t.value(b)), rg,
                [a, b](Tape& t, Var self) {
                  t.accumulate(a, t.grad(self).cwiseProduct(t.value(b)));
                  t.accumulate(b, t.grad(self).cwiseProduct(t.value(a)));
                });
}

Var scale(Tape& t, Var a, double s) {
  return t.make(t.value(a) * s, t.requires_grad(a), [a, s](Tape& t, Var self) {
    t.accumulate(a, t.grad(self) * s);
  });
}

Var add_scalar(Tape& t, Var a, double s) {
  return t.make(t.value(a).array() + s, t.requires_grad(a),
                [a](Tape& t, Var self) { t.accumulate(a, t.grad(self)); });
}

Var neg(Tape& t, Var a) { return scale(t, a, -1.0); }

Var matmul(Tape& t, Var a, Var b) {
  const Matrix& x = t.value(a);
  const Matrix& y = t.value(b);
  if (x.cols() != y.rows())
    throw std::invalid_argument(
        "matmul: shape mismatch (" + std::to_string(x.rows()) + "x" +
        std::to_string(x.cols()) + " * " + std::to_string(y.rows()) + "x" +
        std::to_string(y.cols()) + ")");
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return t.make(x * y, rg, [a, b](Tape& t, Var self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(a)) t.accumulate(a, g * t.value(b).transpose());
    if (t.requires_grad(b)) t.accumulate(b, t.value(a).transpose() * g);
  });
}

Var add_rowvec(Tape& t, Var a, Var bias) {
  const Matrix& x = t.value(a);
  const Matrix& b = t.value(bias);
  if (b.rows() != 1 || b.cols() != x.cols())
    throw std::invalid_argument("add_rowvec: bias must be 1 x cols");
  Matrix out = x;
  out.rowwise() += b.row(0);
  const bool rg = t.requires_grad(a) || t.requires_grad(bias);
  return t.make(std::move(out), rg, [a, bias](Tape& t, Var self) {
    const Matrix& g = t.grad(self);
    t.accumulate(a, g);
    if (t.requires_grad(bias)) t.accumulate(bias, g.colwise().sum());
  });
}

Var leaky_relu(Tape& t, Var a, double slope) {
  const Matrix& x = t.value(a);
  Matrix out = x.array().max(x.array() * slope);
  return t.make(std::move(out), t.requires_grad(a),
                [a, slope](Tape& t, Var self) {
                  const Matrix& x = t.value(a);
                  const Matrix& g = t.grad(self);
                  Matrix dx =
                      (x.array() > 0.0).select(g, g * slope);
                  t.accumulate(a, dx);
                });
}

Var log_elem(Tape& t, Var a) {
  return t.make(t.value(a).array().log(), t.requires_grad(a),
                [a](Tape& t, Var self) {
                  t.accumulate(
                      a, (t.grad(self).array() / t.value(a).array()).matrix());
                });
}

Var exp_elem(Tape& t, Var a) {
  return t.make(t.value(a).array().exp(), t.requires_grad(a),
                [a](Tape& t, Var self) {
                  t.accumulate(a, t.grad(self).cwiseProduct(t.value(self)));
                });
}

Var square(Tape& t, Var a) {
  return t.make(t.value(a).array().square(), t.requires_grad(a),
                [a](Tape& t, Var self) {
                  t.accumulate(
                      a, (2.0 * t.grad(self).array() * t.value(a).array())
                             .matrix());
                });
}

Var clamp_elem(Tape& t, Var a, double lo, double hi) {
  const Matrix& x = t.value(a);
  Matrix out = x.array().max(lo).min(hi);
  return t.make(std::move(out), t.requires_grad(a),
                [a, lo, hi](Tape& t, Var self) {
                  const auto& x = t.value(a).array();
                  const auto& g = t.grad(self).array();
                  Matrix dx = ((x > lo) && (x < hi)).select(g.matrix(), Matrix::Zero(x.rows(), x.cols()));
                  t.accumulate(a, dx);
                });
}

Var min_elem(Tape& t, Var a, Var b) {
  check_same_shape(t, a, b, "min_elem");
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return t.make(t.value(a).cwiseMin(t.value(b)), rg, [a, b](Tape& t, Var self) {
    const auto& x = t.value(a).array();
    const auto& y = t.value(b).array();
    const auto& g = t.grad(self).array();
    const Matrix zero = Matrix::Zero(x.rows(), x.cols());
    t.accumulate(a, (x <= y).select(g.matrix(), zero));
    t.accumulate(b, (x > y).select(g.matrix(), zero));
  });
}

Var sum_all(Tape& t, Var a) {
  Matrix out(1, 1);
  out(0, 0) = t.value(a).sum();
  return t.make(std::move(out), t.requires_grad(a), [a](Tape& t, Var self) {
    const Matrix& x = t.value(a);
    t.accumulate(a,
                 Matrix::Constant(x.rows(), x.cols(), t.grad(self)(0, 0)));
  });
}

Var mean_all(Tape& t, Var a) {
  const double n = static_cast<double>(t.value(a).size());
  Matrix out(1, 1);
  out(0, 0) = t.value(a).sum() / n;
  return t.make(std::move(out), t.requires_grad(a), [a, n](Tape& t, Var self) {
    const Matrix& x = t.value(a);
    t.accumulate(
        a, Matrix::Constant(x.rows(), x.cols(), t.grad(self)(0, 0) / n));
  });
}

Var rowwise_sum(Tape& t, Var a) {
  return t.make(t.value(a).rowwise().sum(), t.requires_grad(a),
                [a](Tape& t, Var self) {
                  const Matrix& x = t.value(a);
                  const Matrix& g = t.grad(self);
                  t.accumulate(a, g * Matrix::Ones(1, x.cols()));
                });
}

Var softmax_rows(Tape& t, Var a) {
  const Matrix& x = t.value(a);
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double shift = x.row(r).maxCoeff();
    out.row(r) = (x.row(r).array() - shift).exp();
    out.row(r) /= out.row(r).sum();
  }
  return t.make(std::move(out), t.requires_grad(a), [a](Tape& t, Var self) {
    const Matrix& p = t.value(self);
    const Matrix& g = t.grad(self);
    const Matrix pg = p.cwiseProduct(g);
    const Vector rowdot = pg.rowwise().sum();
    Matrix dx = pg;
    dx.noalias() -= rowdot.asDiagonal() * p;
    t.accumulate(a, dx);
  });
}

Var log_softmax_rows(Tape& t, Var a) {
  const Matrix& x = t.value(a);
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double shift = x.row(r).maxCoeff();
    const double lse =
        shift + std::log((x.row(r).array() - shift).exp().sum());
    out.row(r) = x.row(r).array() - lse;
  }
  return t.make(std::move(out), t.requires_grad(a), [a](Tape& t, Var self) {
    const Matrix p = t.value(self).array().exp();
    const Matrix& g = t.grad(self);
    const Vector rowsum = g.rowwise().sum();
    Matrix dx = g;
    dx.noalias() -= rowsum.asDiagonal() * p;
    t.accumulate(a, dx);
  });
}

Var gather_rows(Tape& t, Var a, std::vector<int> index) {
  const Matrix& x = t.value(a);
  Matrix out(static_cast<Eigen::Index>(index.size()), x.cols());
  for (std::size_t k = 0; k < index.size(); ++k)
    out.row(static_cast<Eigen::Index>(k)) = x.row(index[k]);
  return t.make(std::move(out), t.requires_grad(a),
                [a, index = std::move(index)](Tape& t, Var self) {
                  const Matrix& x = t.value(a);
                  const Matrix& g = t.grad(self);
                  Matrix dx = Matrix::Zero(x.rows(), x.cols());
                  for (std::size_t k = 0; k < index.size(); ++k)
                    dx.row(index[k]) += g.row(static_cast<Eigen::Index>(k));
                  t.accumulate(a, dx);
                });
}

Var scatter_sum_rows(Tape& t, Var a, std::vector<int> index, int n_out) {
  const Matrix& x = t.value(a);
  if (static_cast<Eigen::Index>(index.size()) != x.rows())
    throw std::invalid_argument("scatter_sum_rows: index size mismatch");
  Matrix out = Matrix::Zero(n_out, x.cols());
  for (std::size_t k = 0; k < index.size(); ++k)
    out.row(index[k]) += x.row(static_cast<Eigen::Index>(k));
  return t.make(std::move(out), t.requires_grad(a),
                [a, index = std::move(index)](Tape& t, Var self) {
                  const Matrix& g = t.grad(self);
                  Matrix dx(static_cast<Eigen::Index>(index.size()), g.cols());
                  for (std::size_t k = 0; k < index.size(); ++k)
                    dx.row(static_cast<Eigen::Index>(k)) = g.row(index[k]);
                  t.accumulate(a, dx);
                });
}

Var gather_per_row(Tape& t, Var a, std::vector<int> column) {
  const Matrix& x = t.value(a);
  if (static_cast<Eigen::Index>(column.size()) != x.rows())
    throw std::invalid_argument("gather_per_row: column size mismatch");
  Matrix out(x.rows(), 1);
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    out(r, 0) = x(r, column[static_cast<std::size_t>(r)]);
  return t.make(std::move(out), t.requires_grad(a),
                [a, column = std::move(column)](Tape& t, Var self) {
                  const Matrix& x = t.value(a);
                  const Matrix& g = t.grad(self);
                  Matrix dx = Matrix::Zero(x.rows(), x.cols());
                  for (Eigen::Index r = 0; r < x.rows(); ++r)
                    dx(r, column[static_cast<std::size_t>(r)]) += g(r, 0);
                  t.accumulate(a, dx);
                });
}

Var mul_colvec(Tape& t, Var a, Var c) {
  const Matrix& x = t.value(a);
  const Matrix& v = t.value(c);
  if (v.cols() != 1 || v.rows() != x.rows())
    throw std::invalid_argument("mul_colvec: scale must be rows x 1");
  const bool rg = t.requires_grad(a) || t.requires_grad(c);
  return t.make(v.col(0).asDiagonal() * x, rg, [a, c](Tape& t, Var self) {
    const Matrix& x = t.value(a);
    const Matrix& v = t.value(c);
    const Matrix& g = t.grad(self);
    if (t.requires_grad(a)) t.accumulate(a, v.col(0).asDiagonal() * g);
    if (t.requires_grad(c))
      t.accumulate(c, g.cwiseProduct(x).rowwise().sum());
  });
}

Var segment_softmax(Tape& t, Var scores, std::vector<int> segment,
                    int n_segments) {
  const Matrix& s = t.value(scores);
  if (s.cols() != 1 || static_cast<Eigen::Index>(segment.size()) != s.rows())
    throw std::invalid_argument("segment_softmax: scores must be e x 1");
  Vector seg_max = Vector::Constant(n_segments, -1e300);
  for (std::size_t k = 0; k < segment.size(); ++k)
    seg_max[segment[k]] =
        std::max(seg_max[segment[k]], s(static_cast<Eigen::Index>(k), 0));
  Matrix out(s.rows(), 1);
  Vector seg_sum = Vector::Zero(n_segments);
  for (std::size_t k = 0; k < segment.size(); ++k) {
    out(static_cast<Eigen::Index>(k), 0) =
        std::exp(s(static_cast<Eigen::Index>(k), 0) - seg_max[segment[k]]);
    seg_sum[segment[k]] += out(static_cast<Eigen::Index>(k), 0);
  }
  for (std::size_t k = 0; k < segment.size(); ++k)
    out(static_cast<Eigen::Index>(k), 0) /= seg_sum[segment[k]];
  return t.make(std::move(out), t.requires_grad(scores),
                [scores, segment = std::move(segment), n_segments](Tape& t,
                                                                   Var self) {
                  const Matrix& p = t.value(self);
                  const Matrix& g = t.grad(self);
                  Vector seg_dot = Vector::Zero(n_segments);
                  for (std::size_t k = 0; k < segment.size(); ++k)
                    seg_dot[segment[k]] += p(static_cast<Eigen::Index>(k), 0) *
                                           g(static_cast<Eigen::Index>(k), 0);
                  Matrix dx(p.rows(), 1);
                  for (std::size_t k = 0; k < segment.size(); ++k) {
                    const auto r = static_cast<Eigen::Index>(k);
                    dx(r, 0) = p(r, 0) * (g(r, 0) - seg_dot[segment[k]]);
                  }
                  t.accumulate(scores, dx);
                });
}

Var segment_mean_rows(Tape& t, Var a, std::vector<int> segment,
                      int n_segments) {
  const Matrix& x = t.value(a);
  if (static_cast<Eigen::Index>(segment.size()) != x.rows())
    throw std::invalid_argument("segment_mean_rows: segment size mismatch");
  Vector count = Vector::Zero(n_segments);
  for (const int s : segment) count[s] += 1.0;
  Matrix out = Matrix::Zero(n_segments, x.cols());
  for (std::size_t k = 0; k < segment.size(); ++k)
    out.row(segment[k]) += x.row(static_cast<Eigen::Index>(k));
  for (int s = 0; s < n_segments; ++s)
    if (count[s] > 0.0) out.row(s) /= count[s];
  return t.make(std::move(out), t.requires_grad(a),
                [a, segment = std::move(segment), count](Tape& t, Var self) {
                  const Matrix& g = t.grad(self);
                  Matrix dx(static_cast<Eigen::Index>(segment.size()),
                            g.cols());
                  for (std::size_t k = 0; k < segment.size(); ++k)
                    dx.row(static_cast<Eigen::Index>(k)) =
                        g.row(segment[k]) / count[segment[k]];
                  t.accumulate(a, dx);
                });
}

Var detach(Tape& t, Var a) { return t.constant(t.value(a)); }

}  // namespace gridmarl::nn
