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

#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "core/params.hpp"

namespace glyce {

/// Adaptive-moment optimizer with bias correction. Each parameter keeps its
/// own step count, so a tensor first trained in a later stage starts its
/// correction from step 1.
class Adam {
 public:
  struct Slot {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t steps = 0;
  };

  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  /// Applies one update from the accumulated gradients. Frozen tensors are
  /// left untouched, moments included.
  void step(const ParamSet& params, const std::unordered_set<const ad::Tensor*>& frozen = {});

  double lr() const { return lr_; }
  std::map<std::string, Slot>& slots() { return slots_; }
  const std::map<std::string, Slot>& slots() const { return slots_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::map<std::string, Slot> slots_;
};

}  // namespace glyce
