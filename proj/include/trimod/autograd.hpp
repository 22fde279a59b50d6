#pragma once

#include <deque>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "trimod/tensor.hpp"

namespace trimod {

class Graph;

/// Handle to a value recorded on a Graph.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }
  double item() const;

  Graph& graph() const { return *graph_; }
  int id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

 private:
  friend class Graph;
  Var(Graph* graph, int id) : graph_(graph), id_(id) {}

  Graph* graph_ = nullptr;
  int id_ = -1;
};

/// Define-by-run tape. One Graph is built per example and discarded after
/// backward(). Parameter leaves write their gradients straight into
/// Parameter::grad, so repeated backward passes accumulate there.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, int self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  /// Leaf bound to a parameter. Repeated calls return the same node.
  Var param(Parameter& p);

  /// Seeds d(output)/d(output) = 1 and propagates to every reachable leaf.
  void backward(Var output);

  std::size_t size() const { return nodes_.size(); }

  // Op-author interface.
  Var record(Tensor value, std::span<const Var> inputs, BackwardFn backward);
  const Tensor& value(int id) const;
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  /// Gradient buffer of a node, allocated as zeros on first access.
  Tensor& grad(int id);

 private:
  struct Node {
    Tensor value;
    Parameter* param = nullptr;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    BackwardFn backward;
  };

  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, int> param_nodes_;
};

// Differentiable operations. No broadcasting: shapes must match exactly.

/// [m x k] * [k x n] -> [m x n]
Var matmul(Var a, Var b);
/// [m x k] * [k] -> [m]
Var matvec(Var w, Var x);
/// w * x + b with w [m x k], x [k], b [m].
Var affine(Var w, Var x, Var b);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
/// 1 - a, elementwise.
Var one_minus(Var a);
Var tanh(Var a);
Var sigmoid(Var a);
Var exp(Var a);
/// Throws DomainError on any non-positive input.
Var log(Var a);

/// Sum of all elements, as a scalar of shape [1].
Var sum(Var a);
Var dot(Var a, Var b);
/// Single element of a vector as a scalar.
Var pick(Var a, std::size_t index);
/// Elementwise mean of same-shaped tensors.
Var average(std::span<const Var> parts);

/// Concatenate along `axis`. Rank-1 tensors only admit axis 0.
Var concat(std::span<const Var> parts, std::size_t axis = 0);
/// Stacks same-length vectors as the rows of a matrix.
Var stack(std::span<const Var> rows);
/// Row `index` of a matrix, as a vector. Gradient touches only that row.
Var row(Var table, std::size_t index);
/// Contiguous sub-vector [offset, offset + length).
Var slice(Var a, std::size_t offset, std::size_t length);

/// Softmax over a vector, computed with max subtraction.
Var softmax(Var a);
/// sum_i weights[i] * parts[i]; weights is a vector with one entry per part.
Var weighted_sum(Var weights, std::span<const Var> parts);
/// -log softmax(logits)[target].
Var softmax_cross_entropy(Var logits, std::size_t target);

// Convenience overloads for brace-initialized part lists.
inline Var concat(std::initializer_list<Var> parts, std::size_t axis = 0) {
  return concat(std::span<const Var>(parts.begin(), parts.size()), axis);
}
inline Var average(std::initializer_list<Var> parts) {
  return average(std::span<const Var>(parts.begin(), parts.size()));
}
inline Var weighted_sum(Var weights, std::initializer_list<Var> parts) {
  return weighted_sum(weights, std::span<const Var>(parts.begin(), parts.size()));
}

}  // namespace trimod
