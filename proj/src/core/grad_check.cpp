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

#include "core/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace glyce::ad {

namespace {

double evaluate(const GraphBuilder& build) {
  Graph g;
  Var out = build(g);
  if (out.size() != 1) {
    throw ContractError("grad_check: graph output must be scalar, got " + shape_str(out.shape()));
  }
  return out.values()[0];
}

void backprop(const GraphBuilder& build, const std::vector<TensorPtr>& params) {
  for (const auto& p : params) p->zero_grad();
  Graph g;
  Var out = build(g);
  if (out.size() != 1) {
    throw ContractError("grad_check: graph output must be scalar, got " + shape_str(out.shape()));
  }
  g.backward(out);
}

double central_difference(const GraphBuilder& build, Tensor& p, std::size_t i, double eps) {
  const double saved = p.values[i];
  p.values[i] = saved + eps;
  const double up = evaluate(build);
  p.values[i] = saved - eps;
  const double down = evaluate(build);
  p.values[i] = saved;
  return (up - down) / (2.0 * eps);
}

}  // namespace

double grad_check(const GraphBuilder& build, const std::vector<TensorPtr>& params, double eps) {
  backprop(build, params);
  double worst = 0.0;
  for (const auto& p : params) {
    for (std::size_t i = 0; i < p->values.size(); ++i) {
      const double numeric = central_difference(build, *p, i, eps);
      const double analytic = p->grad[i];
      const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
      worst = std::max(worst, std::fabs(analytic - numeric) / denom);
    }
  }
  return worst;
}

double grad_check_tensors(const GraphBuilder& build, const std::vector<TensorPtr>& params,
                          double eps) {
  backprop(build, params);
  double worst = 0.0;
  for (const auto& p : params) {
    double diff = 0.0, an = 0.0, nu = 0.0;
    for (std::size_t i = 0; i < p->values.size(); ++i) {
      const double numeric = central_difference(build, *p, i, eps);
      const double analytic = p->grad[i];
      diff += (analytic - numeric) * (analytic - numeric);
      an += analytic * analytic;
      nu += numeric * numeric;
    }
    const double denom = std::max({std::sqrt(an), std::sqrt(nu), 1e-8});
    worst = std::max(worst, std::sqrt(diff) / denom);
  }
  return worst;
}

}  // namespace glyce::ad
