// Copyright 2026 The pbel Authors.
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

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pbel/numerics/tensor.hpp"

namespace pbel::nn {

enum class OpKind : std::uint8_t {
  kConstant,
  kParameter,
  kMatmul,
  kMatmulNT,
  kAdd,
  kAddRow,
  kSub,
  kMul,
  kScale,
  kSigmoid,
  kTanh,
  kGatherRows,
  kSliceCols,
  kConcatCols,
  kRowNormalize,
  kCosine,
  kHinge,
  kInBatchHinge,
  kLstmGates,
  kLstmState,
  kSum,
};

struct NodeId {
  std::int32_t index = -1;
  bool valid() const { return index >= 0; }
  friend bool operator==(NodeId, NodeId) = default;
};

// Append-only reverse-mode tape. Nodes are appended in evaluation order, so
// append order is a topological order; backward() walks it in reverse and
// every op adds its contribution into the gradients of its inputs.
template <typename Scalar>
class Graph {
 public:
  using TensorT = Tensor<Scalar>;
  using BackwardFn = std::function<void(Graph&, NodeId)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  NodeId constant(TensorT value) {
    value.check();
    Node n;
    n.op = OpKind::kConstant;
    n.value = std::move(value);
    n.value.requires_grad = false;
    return push(std::move(n));
  }

  // Leaf bound to a trainable parameter. Gradients are accumulated straight
  // into `p.grad`.
  NodeId parameter(Parameter<Scalar>& p) {
    Node n;
    n.op = OpKind::kParameter;
    n.param = &p;
    n.ref = &p.value;
    n.requires_grad = true;
    if (p.grad.shape != p.value.shape) p.zero_grad();
    return push(std::move(n));
  }

  // Read-only leaf; used for inference with shared, immutable parameters.
  NodeId parameter(const Parameter<Scalar>& p) {
    Node n;
    n.op = OpKind::kParameter;
    n.ref = &p.value;
    n.requires_grad = false;
    return push(std::move(n));
  }

  NodeId add(OpKind op, std::vector<NodeId> inputs, TensorT value,
             BackwardFn backward) {
    Node n;
    n.op = op;
    n.value = std::move(value);
    for (NodeId in : inputs) n.requires_grad |= requires_grad(in);
    n.inputs = std::move(inputs);
    if (n.requires_grad) n.backward = std::move(backward);
    n.value.requires_grad = n.requires_grad;
    return push(std::move(n));
  }

  const TensorT& value(NodeId id) const {
    const Node& n = node(id);
    return n.ref ? *n.ref : n.value;
  }

  bool requires_grad(NodeId id) const { return node(id).requires_grad; }
  OpKind op(NodeId id) const { return node(id).op; }
  const std::vector<NodeId>& inputs(NodeId id) const { return node(id).inputs; }

  // Gradient buffer of a node, allocated as zeros on first use.
  TensorT& grad(NodeId id) {
    Node& n = node(id);
    if (n.param) return n.param->grad;
    if (n.grad.empty()) n.grad = TensorT::zeros(value(id).shape);
    n.has_grad = true;
    return n.grad;
  }

  bool has_grad(NodeId id) const {
    const Node& n = node(id);
    return n.param != nullptr || n.has_grad;
  }

  std::size_t size() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = 1 and propagates to every node that feeds it.
  void backward(NodeId loss) {
    if (value(loss).size() != 1) {
      throw DimensionError("backward: loss must be a scalar, got shape " +
                           shape_string(value(loss).shape));
    }
    if (!requires_grad(loss)) return;
    grad(loss).data[0] = Scalar(1);
    for (std::int32_t i = loss.index; i >= 0; --i) {
      Node& n = nodes_[static_cast<std::size_t>(i)];
      if (!n.backward || !n.has_grad) continue;
      n.backward(*this, NodeId{i});
    }
  }

 private:
  struct Node {
    OpKind op = OpKind::kConstant;
    std::vector<NodeId> inputs;
    TensorT value;
    TensorT grad;
    const TensorT* ref = nullptr;
    Parameter<Scalar>* param = nullptr;
    bool requires_grad = false;
    bool has_grad = false;
    BackwardFn backward;
  };

  NodeId push(Node n) {
    nodes_.push_back(std::move(n));
    return NodeId{static_cast<std::int32_t>(nodes_.size() - 1)};
  }

  Node& node(NodeId id) {
    if (id.index < 0 || static_cast<std::size_t>(id.index) >= nodes_.size()) {
      throw InvalidArgument("graph: node id out of range");
    }
    return nodes_[static_cast<std::size_t>(id.index)];
  }
  const Node& node(NodeId id) const {
    return const_cast<Graph*>(this)->node(id);
  }

  std::vector<Node> nodes_;
};

}  // namespace pbel::nn
