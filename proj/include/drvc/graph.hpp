// Copyright 2026 The DRVC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DRVC_GRAPH_HPP
#define DRVC_GRAPH_HPP

#include <functional>
#include <vector>

#include "drvc/tensor.hpp"

namespace drvc::ad {

using NodeId = int32_t;

// Reverse-mode autodiff tape. Nodes are appended in evaluation order, so the
// tape itself is a topological order and backward() is a single reverse sweep.
// One graph per training step; parameters enter as leaves each step.
class Graph {
 public:
  // Leaves. input() is constant data; param() tracks gradients.
  NodeId input(Tensor v) { return leaf(std::move(v), false); }
  NodeId param(Tensor v) { return leaf(std::move(v), true); }
  NodeId leaf(Tensor v, bool requires_grad);

  // Elementwise, same shape.
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId a, double s);
  NodeId add_bias(NodeId x, NodeId bias);  // x [R,C], bias [C]

  NodeId matmul(NodeId a, NodeId b);  // [M,K] x [K,N]

  NodeId tanh_op(NodeId x);
  NodeId sigmoid(NodeId x);
  NodeId leaky_relu(NodeId x, double slope);
  NodeId softplus(NodeId x);
  NodeId clamp(NodeId x, double lo, double hi);
  NodeId safe_log(NodeId x, double floor);
  NodeId abs_op(NodeId x);
  NodeId softmax_rows(NodeId x);  // [R,K]

  NodeId mean_all(NodeId x);  // -> [1]
  NodeId sum_all(NodeId x);   // -> [1]

  NodeId reshape(NodeId x, std::vector<int64_t> shape);
  NodeId concat_cols(NodeId a, NodeId b);            // [R,Ca]+[R,Cb] -> [R,Ca+Cb]
  NodeId slice_cols(NodeId x, int64_t off, int64_t w);

  // Time-structured ops on [B,T,C].
  NodeId broadcast_time(NodeId v, int64_t t_len);     // [B,C] -> [B,T,C]
  NodeId mean_time(NodeId x);                         // [B,T,C] -> [B,C]
  NodeId time_slice(NodeId x, int64_t t);             // [B,T,C] -> [B,C]
  NodeId time_stack(const std::vector<NodeId>& xs);   // T x [B,C] -> [B,T,C]
  // Unfold a length-K window (K odd, zero-padded) at every step: -> [B*T, K*C]
  NodeId im2col_time(NodeId x, int64_t k);

  // Gradient reversal: identity forward, -lambda * gradient backward.
  NodeId grl(NodeId x, double lambda);
  // Identity forward, no gradient flow.
  NodeId detach(NodeId x);

  const Tensor& value(NodeId id) const { return nodes_[static_cast<size_t>(id)].value; }
  // Gradient of the last backward() root w.r.t. this node (zeros if untouched).
  Tensor grad(NodeId id) const;
  bool requires_grad(NodeId id) const { return nodes_[static_cast<size_t>(id)].requires_grad; }

  void backward(NodeId root);

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;  // empty until first accumulation
    std::function<void(Graph&, NodeId)> backward_fn;
    bool requires_grad = false;
  };

  Node& node(NodeId id) { return nodes_[static_cast<size_t>(id)]; }
  const Node& node(NodeId id) const { return nodes_[static_cast<size_t>(id)]; }
  // Accumulation target for an input; allocates zeros on first use.
  Tensor& grad_buf(NodeId id);
  bool wants(NodeId id) const { return node(id).requires_grad; }
  NodeId push(Tensor value, bool requires_grad,
              std::function<void(Graph&, NodeId)> backward_fn);

  std::vector<Node> nodes_;
};

}  // namespace drvc::ad

#endif  // DRVC_GRAPH_HPP
