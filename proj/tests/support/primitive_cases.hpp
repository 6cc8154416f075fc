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

// Randomized finite-difference cases for every differentiable primitive.
// Shared by the unit suite and the acceptance binary.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "core/rng.hpp"

namespace glyce::testing {

struct PrimitiveCase {
  std::string name;
  /// Builds one random instance and returns its grad_check error.
  std::function<double(Rng&)> run;
};

const std::vector<PrimitiveCase>& primitive_cases();

}  // namespace glyce::testing
