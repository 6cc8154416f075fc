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

#include "core/optim.hpp"

#include <cmath>

#include "core/error.hpp"

namespace glyce {

Adam::Adam(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("learning rate must be positive");
}

void Adam::step(const ParamSet& params, const std::unordered_set<const ad::Tensor*>& frozen) {
  for (const auto& it : params.items()) {
    ad::Tensor& p = *it.tensor;
    if (frozen.count(&p)) continue;
    Slot& s = slots_[it.name];
    if (s.m.size() != p.size()) {
      s.m.assign(p.size(), 0.0);
      s.v.assign(p.size(), 0.0);
      s.steps = 0;
    }
    ++s.steps;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(s.steps));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(s.steps));
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = p.grad[i];
      s.m[i] = beta1_ * s.m[i] + (1.0 - beta1_) * g;
      s.v[i] = beta2_ * s.v[i] + (1.0 - beta2_) * g * g;
      p.values[i] -= lr_ * (s.m[i] / c1) / (std::sqrt(s.v[i] / c2) + eps_);
    }
  }
}

}  // namespace glyce
