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

#include "core/objectives.hpp"

#include <cmath>
#include <string>

#include "core/error.hpp"
#include "core/ops.hpp"

namespace glyce {

ad::Var image_cls_loss(const ad::Var& h_image, const ad::Var& W, const ad::Var& bias,
                       std::size_t char_id) {
  return ad::softmax_cross_entropy(ad::dense(h_image, W, bias), char_id);
}

ad::Var mean_image_cls_loss(const std::vector<ad::Var>& h_images,
                            const std::vector<std::size_t>& char_ids, const ad::Var& W,
                            const ad::Var& bias) {
  if (h_images.empty() || h_images.size() != char_ids.size()) {
    throw ContractError("mean_image_cls_loss: need matching non-empty inputs");
  }
  std::vector<ad::Var> parts;
  parts.reserve(h_images.size());
  for (std::size_t i = 0; i < h_images.size(); ++i)
    parts.push_back(image_cls_loss(h_images[i], W, bias, char_ids[i]));
  return ad::mean(parts);
}

void LambdaSchedule::validate() const {
  if (!(lambda0 >= 0.0 && lambda0 <= 1.0) || !(lambda1 >= 0.0 && lambda1 <= 1.0)) {
    throw ConfigError("lambda0 and lambda1 must lie in [0, 1], got " + std::to_string(lambda0) +
                      ", " + std::to_string(lambda1));
  }
}

double lambda_at(const LambdaSchedule& s, std::size_t t) {
  return s.lambda0 * std::pow(s.lambda1, static_cast<double>(t));
}

CombinedLossParts combined_loss(const ad::Var& task_loss, const ad::Var& cls_loss,
                                const LambdaSchedule& s, std::size_t t) {
  if (task_loss.size() != 1 || cls_loss.size() != 1) {
    throw ShapeError("combined_loss: losses must be scalars");
  }
  if (!std::isfinite(task_loss.item()) || !std::isfinite(cls_loss.item())) {
    throw NumericError("combined_loss: non-finite loss (task=" +
                       std::to_string(task_loss.item()) +
                       ", cls=" + std::to_string(cls_loss.item()) + ")");
  }
  CombinedLossParts out;
  out.task_loss = task_loss;
  out.cls_loss = cls_loss;
  out.lambda_t = lambda_at(s, t);
  out.total = ad::add(ad::scale(task_loss, 1.0 - out.lambda_t), ad::scale(cls_loss, out.lambda_t));
  return out;
}

}  // namespace glyce
