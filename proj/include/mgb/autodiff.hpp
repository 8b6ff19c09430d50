// Reverse-mode automatic differentiation over a small fixed primitive set —
// exactly the operations the graph models need — plus Adam with decoupled
// weight decay. Values live on an append-only tape; backward walks it in
// reverse and accumulates gradients into every parameter that feeds the loss.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mgb/rng.hpp"
#include "mgb/tensor.hpp"

namespace mgb {

using ValueId = std::size_t;

class Tape {
 public:
  // Leaf that never receives a gradient (data, fixed operators).
  ValueId input(Tensor2 v) { return push(OpKind::Input, std::move(v), false); }

  // Leaf whose gradient is tracked.
  ValueId param(Tensor2 v) { return push(OpKind::Param, std::move(v), true); }

  ValueId matmul(ValueId a, ValueId b) {
    Tensor2 out = mgb::matmul(val(a), val(b));
    return push_op(OpKind::MatMul, a, b, std::move(out));
  }

  // m is (r x c), bias is (1 x c); the bias row is added to every row of m.
  ValueId add_row_bias(ValueId m, ValueId bias) {
    const Tensor2& mv = val(m);
    const Tensor2& bv = val(bias);
    if (bv.rows != 1 || bv.cols != mv.cols) {
      throw std::invalid_argument("add_row_bias: bias must be 1 x cols");
    }
    Tensor2 out = mv;
    for (int i = 0; i < out.rows; ++i) {
      for (int j = 0; j < out.cols; ++j) out.at(i, j) += bv.at(0, j);
    }
    return push_op(OpKind::AddRowBias, m, bias, std::move(out));
  }

  ValueId relu(ValueId a) {
    Tensor2 out = val(a);
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    return push_op(OpKind::Relu, a, kNone, std::move(out));
  }

  ValueId row_softmax(ValueId a) {
    const Tensor2& x = val(a);
    Tensor2 out(x.rows, x.cols);
    for (int i = 0; i < x.rows; ++i) {
      double mx = x.at(i, 0);
      for (int j = 1; j < x.cols; ++j) mx = std::max(mx, x.at(i, j));
      double z = 0.0;
      for (int j = 0; j < x.cols; ++j) {
        out.at(i, j) = std::exp(x.at(i, j) - mx);
        z += out.at(i, j);
      }
      for (int j = 0; j < x.cols; ++j) out.at(i, j) /= z;
    }
    return push_op(OpKind::RowSoftmax, a, kNone, std::move(out));
  }

  ValueId concat_cols(ValueId a, ValueId b) {
    const Tensor2& av = val(a);
    const Tensor2& bv = val(b);
    if (av.rows != bv.rows) {
      throw std::invalid_argument("concat_cols: row counts disagree");
    }
    Tensor2 out(av.rows, av.cols + bv.cols);
    for (int i = 0; i < av.rows; ++i) {
      for (int j = 0; j < av.cols; ++j) out.at(i, j) = av.at(i, j);
      for (int j = 0; j < bv.cols; ++j) out.at(i, av.cols + j) = bv.at(i, j);
    }
    return push_op(OpKind::ConcatCols, a, b, std::move(out));
  }

  ValueId scale(ValueId a, double s) {
    Tensor2 out = val(a);
    for (double& v : out.data) v *= s;
    ValueId id = push_op(OpKind::Scale, a, kNone, std::move(out));
    nodes_[id].scalar = s;
    return id;
  }

  // Select a subset of rows (duplicates allowed). Backward scatter-adds.
  ValueId gather_rows(ValueId a, std::vector<int> rows) {
    const Tensor2& av = val(a);
    if (rows.empty()) throw std::invalid_argument("gather_rows: empty");
    Tensor2 out(static_cast<int>(rows.size()), av.cols);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (rows[k] < 0 || rows[k] >= av.rows) {
        throw std::invalid_argument("gather_rows: row out of range");
      }
      for (int j = 0; j < av.cols; ++j) {
        out.at(static_cast<int>(k), j) = av.at(rows[k], j);
      }
    }
    ValueId id = push_op(OpKind::GatherRows, a, kNone, std::move(out));
    nodes_[id].indices = std::move(rows);
    return id;
  }

  // Mean cross-entropy of row-wise softmax(logits) against integer targets.
  // Computed straight from the logits with row-max subtraction, so it stays
  // finite for arbitrarily large inputs. Result is a 1x1 tensor.
  ValueId cross_entropy_mean(ValueId logits, std::vector<int> targets) {
    const Tensor2& z = val(logits);
    if (static_cast<int>(targets.size()) != z.rows) {
      throw std::invalid_argument("cross_entropy_mean: target count");
    }
    Tensor2 probs(z.rows, z.cols);
    double total = 0.0;
    for (int i = 0; i < z.rows; ++i) {
      if (targets[i] < 0 || targets[i] >= z.cols) {
        throw std::invalid_argument("cross_entropy_mean: class out of range");
      }
      double mx = z.at(i, 0);
      for (int j = 1; j < z.cols; ++j) mx = std::max(mx, z.at(i, j));
      double lse = 0.0;
      for (int j = 0; j < z.cols; ++j) lse += std::exp(z.at(i, j) - mx);
      const double log_z = std::log(lse);
      for (int j = 0; j < z.cols; ++j) {
        probs.at(i, j) = std::exp(z.at(i, j) - mx) / lse;
      }
      total += log_z - (z.at(i, targets[i]) - mx);
    }
    Tensor2 out(1, 1);
    out.at(0, 0) = total / z.rows;
    ValueId id = push_op(OpKind::CrossEntropyMean, logits, kNone, std::move(out));
    nodes_[id].indices = std::move(targets);
    nodes_[id].cache = std::move(probs);
    return id;
  }

  const Tensor2& value(ValueId id) const { return val(id); }

  // Gradient of the last backward() target w.r.t. the given value. Only
  // parameters (and interior nodes on a parameter path) carry gradients.
  const Tensor2& grad(ValueId id) const {
    check(id);
    if (!nodes_[id].needs_grad || nodes_[id].grad.data.empty()) {
      throw std::logic_error("grad: value does not carry a gradient");
    }
    return nodes_[id].grad;
  }

  // Seeds d(loss)/d(loss) = seed and accumulates gradients down the tape.
  void backward(ValueId loss, double seed = 1.0) {
    check(loss);
    const Tensor2& lv = nodes_[loss].val;
    if (lv.rows != 1 || lv.cols != 1) {
      throw std::invalid_argument("backward: loss must be scalar");
    }
    for (Node& n : nodes_) {
      if (n.needs_grad) {
        n.grad = Tensor2(n.val.rows, n.val.cols);
      }
    }
    if (!nodes_[loss].needs_grad) return;  // loss independent of all parameters
    nodes_[loss].grad.at(0, 0) = seed;
    for (std::size_t i = loss + 1; i-- > 0;) {
      propagate(i);
    }
  }

 private:
  enum class OpKind {
    Input,
    Param,
    MatMul,
    AddRowBias,
    Relu,
    RowSoftmax,
    ConcatCols,
    Scale,
    GatherRows,
    CrossEntropyMean,
  };

  static constexpr ValueId kNone = static_cast<ValueId>(-1);

  struct Node {
    OpKind kind;
    ValueId a = kNone;
    ValueId b = kNone;
    bool needs_grad = false;
    double scalar = 0.0;
    std::vector<int> indices;  // gather rows / CE targets
    Tensor2 val;
    Tensor2 cache;  // CE: softmax probabilities
    Tensor2 grad;
  };

  void check(ValueId id) const {
    if (id >= nodes_.size()) {
      throw std::invalid_argument("Tape: value id not on this tape");
    }
  }

  const Tensor2& val(ValueId id) const {
    check(id);
    return nodes_[id].val;
  }

  ValueId push(OpKind kind, Tensor2 v, bool needs_grad) {
    Node n;
    n.kind = kind;
    n.needs_grad = needs_grad;
    n.val = std::move(v);
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }

  ValueId push_op(OpKind kind, ValueId a, ValueId b, Tensor2 out) {
    check(a);
    if (b != kNone) check(b);
    Node n;
    n.kind = kind;
    n.a = a;
    n.b = b;
    n.needs_grad = nodes_[a].needs_grad || (b != kNone && nodes_[b].needs_grad);
    n.val = std::move(out);
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }

  void add_into(Tensor2& dst, const Tensor2& src) {
    for (std::size_t k = 0; k < dst.data.size(); ++k) dst.data[k] += src.data[k];
  }

  void propagate(std::size_t i) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.data.empty()) return;
    const Tensor2& g = n.grad;
    switch (n.kind) {
      case OpKind::Input:
      case OpKind::Param:
        break;
      case OpKind::MatMul: {
        if (nodes_[n.a].needs_grad) {
          add_into(nodes_[n.a].grad, matmul_nt(g, nodes_[n.b].val));
        }
        if (nodes_[n.b].needs_grad) {
          add_into(nodes_[n.b].grad, matmul_tn(nodes_[n.a].val, g));
        }
        break;
      }
      case OpKind::AddRowBias: {
        if (nodes_[n.a].needs_grad) add_into(nodes_[n.a].grad, g);
        if (nodes_[n.b].needs_grad) {
          Tensor2& bg = nodes_[n.b].grad;
          for (int r = 0; r < g.rows; ++r) {
            for (int c = 0; c < g.cols; ++c) bg.at(0, c) += g.at(r, c);
          }
        }
        break;
      }
      case OpKind::Relu: {
        if (nodes_[n.a].needs_grad) {
          Tensor2& ag = nodes_[n.a].grad;
          const Tensor2& x = nodes_[n.a].val;
          for (std::size_t k = 0; k < ag.data.size(); ++k) {
            if (x.data[k] > 0.0) ag.data[k] += g.data[k];
          }
        }
        break;
      }
      case OpKind::RowSoftmax: {
        if (nodes_[n.a].needs_grad) {
          Tensor2& ag = nodes_[n.a].grad;
          const Tensor2& y = n.val;
          for (int r = 0; r < y.rows; ++r) {
            double dot = 0.0;
            for (int c = 0; c < y.cols; ++c) dot += g.at(r, c) * y.at(r, c);
            for (int c = 0; c < y.cols; ++c) {
              ag.at(r, c) += y.at(r, c) * (g.at(r, c) - dot);
            }
          }
        }
        break;
      }
      case OpKind::ConcatCols: {
        const int ac = nodes_[n.a].val.cols;
        if (nodes_[n.a].needs_grad) {
          Tensor2& ag = nodes_[n.a].grad;
          for (int r = 0; r < g.rows; ++r) {
            for (int c = 0; c < ac; ++c) ag.at(r, c) += g.at(r, c);
          }
        }
        if (nodes_[n.b].needs_grad) {
          Tensor2& bg = nodes_[n.b].grad;
          for (int r = 0; r < g.rows; ++r) {
            for (int c = 0; c < bg.cols; ++c) bg.at(r, c) += g.at(r, ac + c);
          }
        }
        break;
      }
      case OpKind::Scale: {
        if (nodes_[n.a].needs_grad) {
          Tensor2& ag = nodes_[n.a].grad;
          for (std::size_t k = 0; k < ag.data.size(); ++k) {
            ag.data[k] += n.scalar * g.data[k];
          }
        }
        break;
      }
      case OpKind::GatherRows: {
        if (nodes_[n.a].needs_grad) {
          Tensor2& ag = nodes_[n.a].grad;
          for (std::size_t k = 0; k < n.indices.size(); ++k) {
            for (int c = 0; c < g.cols; ++c) {
              ag.at(n.indices[k], c) += g.at(static_cast<int>(k), c);
            }
          }
        }
        break;
      }
      case OpKind::CrossEntropyMean: {
        if (nodes_[n.a].needs_grad) {
          Tensor2& ag = nodes_[n.a].grad;
          const Tensor2& probs = n.cache;
          const double go = g.at(0, 0) / probs.rows;
          for (int r = 0; r < probs.rows; ++r) {
            for (int c = 0; c < probs.cols; ++c) {
              const double onehot = (c == n.indices[r]) ? 1.0 : 0.0;
              ag.at(r, c) += go * (probs.at(r, c) - onehot);
            }
          }
        }
        break;
      }
    }
  }

  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Adam with decoupled weight decay (decay applied before the adaptive step).

struct AdamState {
  Tensor2 m, v;
  long t = 0;
};

inline void adam_step(Tensor2& param, const Tensor2& grad, AdamState& state,
                      double lr, double beta1 = 0.9, double beta2 = 0.999,
                      double eps = 1e-8, double weight_decay = 0.0) {
  if (!param.same_shape(grad)) {
    throw std::invalid_argument("adam_step: parameter/gradient shape mismatch");
  }
  for (double g : grad.data) {
    if (!std::isfinite(g)) {
      throw std::runtime_error("adam_step: non-finite gradient encountered");
    }
  }
  if (state.t == 0) {
    state.m = Tensor2(param.rows, param.cols);
    state.v = Tensor2(param.rows, param.cols);
  } else if (!state.m.same_shape(param)) {
    throw std::invalid_argument("adam_step: state shape mismatch");
  }
  state.t += 1;
  if (weight_decay != 0.0) {
    for (double& p : param.data) p -= lr * weight_decay * p;
  }
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (std::size_t k = 0; k < param.data.size(); ++k) {
    const double g = grad.data[k];
    state.m.data[k] = beta1 * state.m.data[k] + (1.0 - beta1) * g;
    state.v.data[k] = beta2 * state.v.data[k] + (1.0 - beta2) * g * g;
    const double mhat = state.m.data[k] / bc1;
    const double vhat = state.v.data[k] / bc2;
    param.data[k] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace mgb
