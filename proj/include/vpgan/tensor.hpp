// Copyright 2026 The vpgan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VPGAN_TENSOR_HPP
#define VPGAN_TENSOR_HPP

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vpgan/errors.hpp"

namespace vpgan {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

inline bool all_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

class Tape;

// Lightweight handle to a node on a tape. Values are row-major
// rows x cols buffers; a plain vector is 1 x d and a scalar is 1 x 1.
class Tensor {
 public:
  Tensor() = default;

  std::size_t id() const { return id_; }
  std::size_t rows() const;
  std::size_t cols() const;
  std::size_t size() const { return rows() * cols(); }
  bool valid() const { return tape_ != nullptr; }

  const std::vector<double>& value() const;
  // Gradient of the last backward root w.r.t. this tensor. Empty until
  // backward has run over a graph this node participates in.
  const std::vector<double>& grad() const;

 private:
  friend class Tape;
  Tensor(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Records every operation of a forward pass; backward replays the record
// in reverse. One thread owns a tape at a time.
class Tape {
 public:
  Tensor leaf(std::size_t rows, std::size_t cols,
              std::span<const double> data, bool requires_grad) {
    check_shape(rows, cols, data.size());
    Node node;
    node.rows = rows;
    node.cols = cols;
    node.value.assign(data.begin(), data.end());
    node.requires_grad = requires_grad;
    return push(std::move(node));
  }

  Tensor constant(std::size_t rows, std::size_t cols,
                  std::span<const double> data) {
    return leaf(rows, cols, data, /*requires_grad=*/false);
  }

  Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
    Node node;
    node.rows = rows;
    node.cols = cols;
    node.value.assign(rows * cols, 0.0);
    node.requires_grad = requires_grad;
    return push(std::move(node));
  }

  // (m x k) * (k x n) -> (m x n)
  Tensor matmul(Tensor a, Tensor b) {
    const Node& na = node(a);
    const Node& nb = node(b);
    if (na.cols != nb.rows) {
      throw ConfigError("matmul: inner dimensions disagree (" +
                        std::to_string(na.cols) + " vs " +
                        std::to_string(nb.rows) + ")");
    }
    Node out;
    out.rows = na.rows;
    out.cols = nb.cols;
    out.value.resize(out.rows * out.cols);
    map(out).noalias() = cmap(na) * cmap(nb);
    out.requires_grad = na.requires_grad || nb.requires_grad;
    out.parents = {a.id(), b.id()};
    out.backward = [ia = a.id(), ib = b.id()](Tape& t, const Node& o) {
      Node& pa = t.nodes_[ia];
      Node& pb = t.nodes_[ib];
      if (pa.requires_grad) {
        t.grad_map(pa).noalias() += t.cgrad_map(o) * t.cmap(pb).transpose();
      }
      if (pb.requires_grad) {
        t.grad_map(pb).noalias() += t.cmap(pa).transpose() * t.cgrad_map(o);
      }
    };
    return push(std::move(out));
  }

  Tensor add(Tensor a, Tensor b) { return binary_elementwise(a, b, +1.0); }
  Tensor sub(Tensor a, Tensor b) { return binary_elementwise(a, b, -1.0); }

  // Adds a 1 x n row vector to every row of a (m x n) tensor.
  Tensor add_row(Tensor a, Tensor row) {
    const Node& na = node(a);
    const Node& nr = node(row);
    if (nr.rows != 1 || nr.cols != na.cols) {
      throw ConfigError("add_row: expected 1 x " + std::to_string(na.cols) +
                        " row vector");
    }
    Node out;
    out.rows = na.rows;
    out.cols = na.cols;
    out.value.resize(na.value.size());
    map(out) = cmap(na).rowwise() + cmap(nr).row(0);
    out.requires_grad = na.requires_grad || nr.requires_grad;
    out.parents = {a.id(), row.id()};
    out.backward = [ia = a.id(), ir = row.id()](Tape& t, const Node& o) {
      Node& pa = t.nodes_[ia];
      Node& pr = t.nodes_[ir];
      if (pa.requires_grad) t.grad_map(pa) += t.cgrad_map(o);
      if (pr.requires_grad) {
        // Fixed-order scalar column sums: Eigen's vectorized partial
        // reduction rounds differently depending on buffer alignment,
        // which would break bitwise reproducibility.
        for (std::size_t i = 0; i < o.rows; ++i) {
          for (std::size_t j = 0; j < o.cols; ++j) {
            pr.grad[j] += o.grad[i * o.cols + j];
          }
        }
      }
    };
    return push(std::move(out));
  }

  // max(x, 0) + slope * min(x, 0); slope 0 is plain ReLU.
  Tensor leaky_relu(Tensor a, double slope) {
    const Node& na = node(a);
    Node out;
    out.rows = na.rows;
    out.cols = na.cols;
    out.value.resize(na.value.size());
    for (std::size_t i = 0; i < na.value.size(); ++i) {
      const double x = na.value[i];
      out.value[i] = x > 0.0 ? x : slope * x;
    }
    out.requires_grad = na.requires_grad;
    out.parents = {a.id(), kNoParent};
    out.backward = [ia = a.id(), slope](Tape& t, const Node& o) {
      Node& pa = t.nodes_[ia];
      if (!pa.requires_grad) return;
      for (std::size_t i = 0; i < pa.value.size(); ++i) {
        pa.grad[i] += o.grad[i] * (pa.value[i] > 0.0 ? 1.0 : slope);
      }
    };
    return push(std::move(out));
  }

  Tensor square(Tensor a) {
    const Node& na = node(a);
    Node out;
    out.rows = na.rows;
    out.cols = na.cols;
    out.value.resize(na.value.size());
    for (std::size_t i = 0; i < na.value.size(); ++i) {
      out.value[i] = na.value[i] * na.value[i];
    }
    out.requires_grad = na.requires_grad;
    out.parents = {a.id(), kNoParent};
    out.backward = [ia = a.id()](Tape& t, const Node& o) {
      Node& pa = t.nodes_[ia];
      if (!pa.requires_grad) return;
      for (std::size_t i = 0; i < pa.value.size(); ++i) {
        pa.grad[i] += 2.0 * pa.value[i] * o.grad[i];
      }
    };
    return push(std::move(out));
  }

  Tensor scale(Tensor a, double factor) {
    const Node& na = node(a);
    Node out;
    out.rows = na.rows;
    out.cols = na.cols;
    out.value.resize(na.value.size());
    for (std::size_t i = 0; i < na.value.size(); ++i) {
      out.value[i] = factor * na.value[i];
    }
    out.requires_grad = na.requires_grad;
    out.parents = {a.id(), kNoParent};
    out.backward = [ia = a.id(), factor](Tape& t, const Node& o) {
      Node& pa = t.nodes_[ia];
      if (!pa.requires_grad) return;
      for (std::size_t i = 0; i < pa.value.size(); ++i) {
        pa.grad[i] += factor * o.grad[i];
      }
    };
    return push(std::move(out));
  }

  // Contiguous row range [start, start + count) as a new tensor.
  Tensor slice_rows(Tensor a, std::size_t start, std::size_t count) {
    const Node& na = node(a);
    if (start + count > na.rows) {
      throw ConfigError("slice_rows: range [" + std::to_string(start) + ", " +
                        std::to_string(start + count) + ") exceeds " +
                        std::to_string(na.rows) + " rows");
    }
    Node out;
    out.rows = count;
    out.cols = na.cols;
    out.value.assign(na.value.begin() + start * na.cols,
                     na.value.begin() + (start + count) * na.cols);
    out.requires_grad = na.requires_grad;
    out.parents = {a.id(), kNoParent};
    out.backward = [ia = a.id(), start](Tape& t, const Node& o) {
      Node& pa = t.nodes_[ia];
      if (!pa.requires_grad) return;
      const std::size_t base = start * pa.cols;
      for (std::size_t i = 0; i < o.grad.size(); ++i) {
        pa.grad[base + i] += o.grad[i];
      }
    };
    return push(std::move(out));
  }

  // Mean over all entries -> 1 x 1. Fixed-order scalar accumulation: a
  // vectorized reduction rounds differently depending on the buffer's
  // alignment, which would break bitwise reproducibility across runs.
  Tensor mean_all(Tensor a) {
    const Node& na = node(a);
    Node out;
    out.rows = 1;
    out.cols = 1;
    double sum = 0.0;
    for (const double v : na.value) sum += v;
    out.value.assign(1, sum / static_cast<double>(na.value.size()));
    out.requires_grad = na.requires_grad;
    out.parents = {a.id(), kNoParent};
    out.backward = [ia = a.id()](Tape& t, const Node& o) {
      Node& pa = t.nodes_[ia];
      if (!pa.requires_grad) return;
      const double g = o.grad[0] / static_cast<double>(pa.value.size());
      for (double& v : pa.grad) v += g;
    };
    return push(std::move(out));
  }

  // Populates gradients of every requires_grad node reachable from root.
  // Root must be scalar (1 x 1).
  void backward(Tensor root) {
    Node& nr = node_mut(root);
    if (nr.rows != 1 || nr.cols != 1) {
      throw ConfigError("backward: root must be a scalar, got " +
                        std::to_string(nr.rows) + " x " +
                        std::to_string(nr.cols));
    }
    for (Node& n : nodes_) {
      if (n.requires_grad) {
        n.grad.assign(n.value.size(), 0.0);
      }
    }
    if (!nr.requires_grad) return;  // constant graph: all gradients zero
    nr.grad[0] = 1.0;
    for (std::size_t i = root.id() + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (n.requires_grad && n.backward) {
        n.backward(*this, n);
      }
    }
  }

  void reset() { nodes_.clear(); }
  std::size_t node_count() const { return nodes_.size(); }

  const std::vector<double>& value_of(std::size_t id) const {
    return nodes_.at(id).value;
  }
  const std::vector<double>& grad_of(std::size_t id) const {
    return nodes_.at(id).grad;
  }
  std::size_t rows_of(std::size_t id) const { return nodes_.at(id).rows; }
  std::size_t cols_of(std::size_t id) const { return nodes_.at(id).cols; }

 private:
  static constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);

  struct Node {
    std::size_t rows = 0, cols = 0;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
    std::array<std::size_t, 2> parents = {kNoParent, kNoParent};
    // Accumulates parent gradients from this node's gradient.
    std::function<void(Tape&, const Node&)> backward;
  };

  static void check_shape(std::size_t rows, std::size_t cols,
                          std::size_t len) {
    if (rows * cols != len) {
      throw ConfigError("tensor data length " + std::to_string(len) +
                        " does not match shape " + std::to_string(rows) +
                        " x " + std::to_string(cols));
    }
  }

  Tensor binary_elementwise(Tensor a, Tensor b, double sign_b) {
    const Node& na = node(a);
    const Node& nb = node(b);
    if (na.rows != nb.rows || na.cols != nb.cols) {
      throw ConfigError("elementwise op: shape mismatch (" +
                        std::to_string(na.rows) + "x" +
                        std::to_string(na.cols) + " vs " +
                        std::to_string(nb.rows) + "x" +
                        std::to_string(nb.cols) + ")");
    }
    Node out;
    out.rows = na.rows;
    out.cols = na.cols;
    out.value.resize(na.value.size());
    for (std::size_t i = 0; i < na.value.size(); ++i) {
      out.value[i] = na.value[i] + sign_b * nb.value[i];
    }
    out.requires_grad = na.requires_grad || nb.requires_grad;
    out.parents = {a.id(), b.id()};
    out.backward = [ia = a.id(), ib = b.id(), sign_b](Tape& t,
                                                      const Node& o) {
      Node& pa = t.nodes_[ia];
      Node& pb = t.nodes_[ib];
      if (pa.requires_grad) {
        for (std::size_t i = 0; i < pa.grad.size(); ++i) {
          pa.grad[i] += o.grad[i];
        }
      }
      if (pb.requires_grad) {
        for (std::size_t i = 0; i < pb.grad.size(); ++i) {
          pb.grad[i] += sign_b * o.grad[i];
        }
      }
    };
    return push(std::move(out));
  }

  Tensor push(Node node) {
    nodes_.push_back(std::move(node));
    return Tensor(this, nodes_.size() - 1);
  }

  const Node& node(Tensor t) const {
    if (t.tape_ != this) throw ConfigError("tensor belongs to another tape");
    return nodes_.at(t.id());
  }
  Node& node_mut(Tensor t) {
    if (t.tape_ != this) throw ConfigError("tensor belongs to another tape");
    return nodes_.at(t.id());
  }

  MatrixMap map(Node& n) {
    return MatrixMap(n.value.data(), static_cast<Eigen::Index>(n.rows),
                     static_cast<Eigen::Index>(n.cols));
  }
  ConstMatrixMap cmap(const Node& n) const {
    return ConstMatrixMap(n.value.data(), static_cast<Eigen::Index>(n.rows),
                          static_cast<Eigen::Index>(n.cols));
  }
  MatrixMap grad_map(Node& n) {
    return MatrixMap(n.grad.data(), static_cast<Eigen::Index>(n.rows),
                     static_cast<Eigen::Index>(n.cols));
  }
  ConstMatrixMap cgrad_map(const Node& n) const {
    return ConstMatrixMap(n.grad.data(), static_cast<Eigen::Index>(n.rows),
                          static_cast<Eigen::Index>(n.cols));
  }

  std::vector<Node> nodes_;
};

inline std::size_t Tensor::rows() const { return tape_->rows_of(id_); }
inline std::size_t Tensor::cols() const { return tape_->cols_of(id_); }
inline const std::vector<double>& Tensor::value() const {
  return tape_->value_of(id_);
}
inline const std::vector<double>& Tensor::grad() const {
  return tape_->grad_of(id_);
}

}  // namespace vpgan

#endif  // VPGAN_TENSOR_HPP
