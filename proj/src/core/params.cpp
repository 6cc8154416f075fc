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

#include "core/params.hpp"

#include <cmath>

#include "core/error.hpp"

namespace glyce {

ad::TensorPtr ParamSet::add(const std::string& name, ad::Shape shape) {
  if (contains(name)) throw ContractError("duplicate parameter name " + name);
  auto t = ad::make_tensor(std::move(shape));
  index_.emplace(name, items_.size());
  items_.push_back({name, t});
  return t;
}

const ad::TensorPtr& ParamSet::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter " + name);
  return items_[it->second].tensor;
}

std::size_t ParamSet::numel() const {
  std::size_t n = 0;
  for (const auto& it : items_) n += it.tensor->size();
  return n;
}

void ParamSet::extend(const std::string& prefix, const ParamSet& other) {
  for (const auto& it : other.items_) {
    const std::string name = prefix + it.name;
    if (contains(name)) throw ContractError("duplicate parameter name " + name);
    index_.emplace(name, items_.size());
    items_.push_back({name, it.tensor});
  }
}

void ParamSet::zero_grad() const {
  for (const auto& it : items_) it.tensor->zero_grad();
}

ParamSet ParamSet::clone() const {
  ParamSet out;
  for (const auto& it : items_) {
    auto t = out.add(it.name, it.tensor->shape);
    t->values = it.tensor->values;
  }
  return out;
}

void ParamSet::copy_values_from(const ParamSet& other) const {
  for (const auto& it : items_) {
    const auto& src = other.get(it.name);
    if (src->shape != it.tensor->shape) {
      throw ShapeError("parameter " + it.name + " shape " + ad::shape_str(src->shape) +
                       " != " + ad::shape_str(it.tensor->shape));
    }
    it.tensor->values = src->values;
  }
}

ad::Var Binder::operator()(const ad::TensorPtr& p) {
  auto it = bound_.find(p.get());
  if (it != bound_.end()) return it->second;
  ad::Var v = graph_.param(p, frozen_.count(p.get()) == 0);
  bound_.emplace(p.get(), v);
  return v;
}

void init_uniform(ad::Tensor& t, double bound, Rng& rng) {
  for (auto& v : t.values) v = rng.uniform(-bound, bound);
}

void init_fan_in_uniform(ad::Tensor& t, std::size_t fan_in, Rng& rng) {
  init_uniform(t, std::sqrt(6.0 / static_cast<double>(fan_in)), rng);
}

void init_xavier_uniform(ad::Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  init_uniform(t, std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)), rng);
}

}  // namespace glyce
