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

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace glyce {

struct NamedTensor {
  std::string name;
  ad::TensorPtr tensor;
};

/// Ordered, name-addressable collection of parameter tensors. Names are the
/// stable keys used by checkpoints.
class ParamSet {
 public:
  ad::TensorPtr add(const std::string& name, ad::Shape shape);
  const ad::TensorPtr& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  const std::vector<NamedTensor>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  /// Total scalar count.
  std::size_t numel() const;
  /// Appends every entry of `other` with `prefix` prepended to its name.
  void extend(const std::string& prefix, const ParamSet& other);
  void zero_grad() const;
  /// Deep copy of the values (gradients cleared).
  ParamSet clone() const;
  void copy_values_from(const ParamSet& other) const;

 private:
  std::vector<NamedTensor> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Registers parameters into one graph, once each. Tensors in the frozen set
/// enter as non-trainable leaves.
class Binder {
 public:
  explicit Binder(ad::Graph& g) : graph_(g) {}
  Binder(ad::Graph& g, std::unordered_set<const ad::Tensor*> frozen)
      : graph_(g), frozen_(std::move(frozen)) {}

  ad::Var operator()(const ad::TensorPtr& p);
  ad::Graph& graph() { return graph_; }

 private:
  ad::Graph& graph_;
  std::unordered_set<const ad::Tensor*> frozen_;
  std::unordered_map<const ad::Tensor*, ad::Var> bound_;
};

/// uniform(-b, b) with b = sqrt(6 / fan_in).
void init_fan_in_uniform(ad::Tensor& t, std::size_t fan_in, Rng& rng);
/// uniform(-b, b) with b = sqrt(6 / (fan_in + fan_out)).
void init_xavier_uniform(ad::Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng);
void init_uniform(ad::Tensor& t, double bound, Rng& rng);

}  // namespace glyce
