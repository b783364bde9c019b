/* Copyright 2026 The usmae Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <unordered_map>
#include <deque>
#include <vector>

#include "usmae/diffcore/param_set.hpp"
#include "usmae/diffcore/tensor.hpp"
#include "usmae/rng.hpp"

namespace usmae::diff {

/// Handle to a value recorded on a graph.
struct Var {
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::size_t id = kNone;
  bool valid() const { return id != kNone; }
};

/// Tape for reverse-mode differentiation over dense tensors.
///
/// Every operation evaluates eagerly and records a closure that propagates the
/// output gradient to its inputs. `backward` walks the tape in reverse
/// recording order and then adds parameter gradients into the bound ParamSet
/// in parameter insertion order, so results are bitwise reproducible.
///
/// Matrices are rank-2 row-major; vectors (biases, gains) are rank-1 and
/// broadcast over rows where an operation says so.
template <typename T>
class BasicGraph {
 public:
  using TensorT = BasicTensor<T>;

  explicit BasicGraph(BasicParamSet<T>* params = nullptr) : params_(params) {}

  BasicGraph(const BasicGraph&) = delete;
  BasicGraph& operator=(const BasicGraph&) = delete;

  /// Leaf that never receives a gradient.
  Var constant(TensorT value);

  /// Leaf bound to a named entry of the ParamSet. Repeated calls with the same
  /// name return the same node.
  Var param(std::string_view name);

  /// Stays valid while the graph lives.
  const TensorT& value(Var v) const { return nodes_.at(v.id).value; }

  /// Gradient of the last `backward` target w.r.t. `v`; zeros if `v` did not
  /// influence it.
  TensorT grad(Var v) const;

  std::size_t node_count() const { return nodes_.size(); }

  // --- linear algebra -------------------------------------------------------

  /// [m,k] x [k,n] -> [m,n]
  Var matmul(Var a, Var b);

  /// x[m,k] * w[k,n] + bias[n] broadcast over rows.
  Var linear(Var x, Var w, Var bias);

  // --- elementwise ----------------------------------------------------------

  /// Same-shape addition.
  Var add(Var a, Var b);
  Var scale(Var a, T factor);
  Var gelu(Var x);

  /// Inverted dropout. Identity when `training` is false or `rate` is zero.
  Var dropout(Var x, T rate, Rng& rng, bool training);

  // --- normalization and attention -----------------------------------------

  /// Softmax along `axis`, max-subtracted.
  Var softmax(Var x, std::size_t axis);

  /// Row-wise layer normalization of x[rows,d] with gain/bias of extent d.
  Var layer_norm(Var x, Var gamma, Var beta, T eps = T(1e-5));

  /// Multi-head scaled dot-product attention.
  ///
  /// q, k, v: [batch*seq, heads*d_head]; rows are grouped per example, columns
  /// per head. Each (example, head) pair attends independently:
  /// softmax(Q K^T / sqrt(d_head)) V. Output has the input shape.
  Var attention(Var q, Var k, Var v, std::size_t batch, std::size_t heads);

  // --- row bookkeeping ------------------------------------------------------

  /// out[i] = table[indices[i]]
  Var gather_rows(Var table, std::span<const std::size_t> indices);

  /// [total, d] tensor with rows[i] at row positions[i] and `fill` (extent d)
  /// everywhere else. Positions must be distinct.
  Var scatter_rows(Var rows, std::span<const std::size_t> positions, Var fill,
                   std::size_t total);

  /// [groups*n, d] -> [groups, d], mean over each block of n rows.
  Var mean_rows(Var x, std::size_t groups);

  // --- reductions and losses ------------------------------------------------

  Var sum(Var x);

  /// Mean absolute error over the rows flagged in `masked` only:
  /// sum_{r masked} |pred[r] - target[r]|_1 / (count * cols).
  Var masked_l1(Var pred, const TensorT& target,
                std::span<const std::uint8_t> masked);

  /// Mean softmax cross-entropy of logits[B,C] against integer labels.
  Var cross_entropy(Var logits, std::span<const int> labels);

  /// Reverse pass from a single-element node. Parameter gradients are added to
  /// (not overwritten in) the bound ParamSet.
  void backward(Var loss);

 private:
  using Backward = std::function<void(BasicGraph&, std::size_t)>;

  struct Node {
    TensorT value;
    TensorT grad;
    bool requires_grad = false;
    std::ptrdiff_t param = -1;
    Backward backward;
  };

  Var push(TensorT value, bool requires_grad, Backward fn = {});
  bool needs(Var v) const { return nodes_[v.id].requires_grad; }
  TensorT& grad_ref(std::size_t id);
  const Node& node(Var v) const { return nodes_.at(v.id); }

  std::deque<Node> nodes_;  // deque: references from value() stay valid
  BasicParamSet<T>* params_;
  std::unordered_map<std::size_t, std::size_t> param_nodes_;
};

using Graph = BasicGraph<float>;
using GraphD = BasicGraph<double>;

extern template class BasicGraph<float>;
extern template class BasicGraph<double>;

}  // namespace usmae::diff
