// Copyright 2026 The Glyce Desk Authors.
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

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

namespace glyce::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Dense row-major array with a same-shape gradient accumulator.
struct Tensor {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0);
  Tensor(Shape s, std::vector<double> v);

  static Tensor scalar(double v) { return Tensor({1}, std::vector<double>{v}); }

  std::size_t size() const { return values.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t dim(std::size_t axis) const { return shape.at(axis); }

  void zero_grad();
};

using TensorPtr = std::shared_ptr<Tensor>;

TensorPtr make_tensor(Shape shape, double fill = 0.0);

class Graph;

/// Handle to a tensor recorded in a Graph.
class Var {
 public:
  Var() = default;

  const Tensor& tensor() const { return *t_; }
  const TensorPtr& ptr() const { return t_; }
  const Shape& shape() const { return t_->shape; }
  std::size_t size() const { return t_->values.size(); }
  const std::vector<double>& values() const { return t_->values; }
  const std::vector<double>& grad() const { return t_->grad; }
  double item() const;
  bool requires_grad() const { return requires_grad_; }
  Graph* graph() const { return graph_; }
  bool valid() const { return t_ != nullptr; }

 private:
  friend class Graph;
  Graph* graph_ = nullptr;
  TensorPtr t_;
  bool requires_grad_ = false;
};

/// Tape of primitive applications for one forward pass. Nodes are appended in
/// creation order, which is a topological order; backward walks it reversed.
/// A graph is confined to one thread.
class Graph {
 public:
  /// Receives the output tensor (with its accumulated gradient) and adds the
  /// chain-rule contributions into the parents' gradients.
  using BackwardFn = std::function<void(const Tensor& out)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Long-lived parameter leaf. Gradients accumulate into `p->grad` directly;
  /// a non-trainable parameter behaves as a constant.
  Var param(const TensorPtr& p, bool trainable = true);
  /// Leaf that never receives a gradient.
  Var constant(Tensor t);
  /// Leaf owned by the graph that does receive a gradient.
  Var input(Tensor t);

  /// Appends an op node. The backward function is kept only when some parent
  /// requires a gradient.
  Var record(Tensor out, std::initializer_list<Var> parents, BackwardFn fn);
  Var record(Tensor out, const std::vector<Var>& parents, BackwardFn fn);

  /// Seeds d(root)/d(root) = 1 and propagates. `root` must be a scalar.
  void backward(const Var& root);

  std::size_t node_count() const { return nodes_.size(); }
  /// Node indices in the order the last backward pass visited them.
  const std::vector<std::size_t>& last_backward_order() const { return order_; }

 private:
  struct Node {
    TensorPtr out;
    BackwardFn fn;
  };

  Var push(TensorPtr t, bool requires_grad, BackwardFn fn);
  void check_owned(const Var& v) const;

  std::vector<Node> nodes_;
  std::vector<std::size_t> order_;
};

}  // namespace glyce::ad
