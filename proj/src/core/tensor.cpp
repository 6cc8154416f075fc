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

#include "core/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "core/error.hpp"

namespace glyce::ad {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

static void check_extents(const Shape& s) {
  if (s.empty()) throw ShapeError("tensor shape must have at least one axis");
  for (auto d : s) {
    if (d == 0) throw ShapeError("tensor extents must be positive, got " + shape_str(s));
  }
}

Tensor::Tensor(Shape s, double fill) : shape(std::move(s)) {
  check_extents(shape);
  values.assign(numel(shape), fill);
  grad.assign(values.size(), 0.0);
}

Tensor::Tensor(Shape s, std::vector<double> v) : shape(std::move(s)), values(std::move(v)) {
  check_extents(shape);
  if (values.size() != numel(shape)) {
    throw ShapeError("value count " + std::to_string(values.size()) + " does not match shape " +
                     shape_str(shape));
  }
  grad.assign(values.size(), 0.0);
}

void Tensor::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

TensorPtr make_tensor(Shape shape, double fill) {
  return std::make_shared<Tensor>(std::move(shape), fill);
}

double Var::item() const {
  if (t_->values.size() != 1) {
    throw ContractError("item() on non-scalar tensor " + shape_str(t_->shape));
  }
  return t_->values[0];
}

Var Graph::push(TensorPtr t, bool requires_grad, BackwardFn fn) {
  Var v;
  v.graph_ = this;
  v.t_ = t;
  v.requires_grad_ = requires_grad;
  nodes_.push_back(Node{std::move(t), requires_grad ? std::move(fn) : BackwardFn{}});
  return v;
}

void Graph::check_owned(const Var& v) const {
  if (!v.valid()) throw ContractError("use of an empty Var");
  if (v.graph_ != this) throw ContractError("Var belongs to a different graph");
}

Var Graph::param(const TensorPtr& p, bool trainable) {
  if (!p) throw ContractError("null parameter tensor");
  return push(p, trainable, {});
}

Var Graph::constant(Tensor t) {
  return push(std::make_shared<Tensor>(std::move(t)), false, {});
}

Var Graph::input(Tensor t) {
  return push(std::make_shared<Tensor>(std::move(t)), true, {});
}

Var Graph::record(Tensor out, std::initializer_list<Var> parents, BackwardFn fn) {
  bool needs = false;
  for (const auto& p : parents) {
    check_owned(p);
    needs = needs || p.requires_grad();
  }
  return push(std::make_shared<Tensor>(std::move(out)), needs, std::move(fn));
}

Var Graph::record(Tensor out, const std::vector<Var>& parents, BackwardFn fn) {
  bool needs = false;
  for (const auto& p : parents) {
    check_owned(p);
    needs = needs || p.requires_grad();
  }
  return push(std::make_shared<Tensor>(std::move(out)), needs, std::move(fn));
}

void Graph::backward(const Var& root) {
  check_owned(root);
  if (root.size() != 1) {
    throw ContractError("backward requires a scalar root, got shape " + shape_str(root.shape()));
  }
  root.t_->grad[0] += 1.0;
  order_.clear();
  order_.reserve(nodes_.size());
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    order_.push_back(i);
    const Node& n = nodes_[i];
    if (n.fn) n.fn(*n.out);
  }
}

}  // namespace glyce::ad
