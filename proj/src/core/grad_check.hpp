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

#include <functional>
#include <vector>

#include "core/tensor.hpp"

namespace glyce::ad {

/// Builds a scalar-valued graph over `params` (registered via Graph::param).
using GraphBuilder = std::function<Var(Graph&)>;

/// Compares reverse-mode gradients against central differences and returns
/// max |analytic - numeric| / max(|analytic|, |numeric|, 1e-8) over every
/// parameter element. Parameter gradients are left holding the analytic values.
double grad_check(const GraphBuilder& build, const std::vector<TensorPtr>& params,
                  double eps = 1e-5);

/// Same sweep, scored per parameter tensor: ||analytic - numeric||_2 /
/// max(||analytic||_2, ||numeric||_2, 1e-8), worst tensor returned. Suited
/// to large graphs where many elements have near-zero gradients.
double grad_check_tensors(const GraphBuilder& build, const std::vector<TensorPtr>& params,
                          double eps = 1e-6);

}  // namespace glyce::ad
