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

// Auxiliary glyph classification loss and its decaying blend with the task
// loss.

#pragma once

#include <cstddef>
#include <vector>

#include "core/tensor.hpp"

namespace glyce {

/// -log softmax(W h + b)[char_id], W laid out [n_chars, d_glyph].
ad::Var image_cls_loss(const ad::Var& h_image, const ad::Var& W, const ad::Var& bias,
                       std::size_t char_id);

/// Mean of image_cls_loss over (embedding, char id) pairs; callers pass each
/// distinct character once.
ad::Var mean_image_cls_loss(const std::vector<ad::Var>& h_images,
                            const std::vector<std::size_t>& char_ids, const ad::Var& W,
                            const ad::Var& bias);

struct LambdaSchedule {
  double lambda0 = 0.1;
  double lambda1 = 0.8;

  /// Throws ConfigError unless both lie in [0, 1].
  void validate() const;
};

/// lambda0 * lambda1^t.
double lambda_at(const LambdaSchedule& s, std::size_t t);

struct CombinedLossParts {
  ad::Var task_loss;
  ad::Var cls_loss;
  double lambda_t = 0.0;
  ad::Var total;
};

/// total = (1 - lambda) task + lambda cls, lambda constant. NumericError if
/// either loss is non-finite.
CombinedLossParts combined_loss(const ad::Var& task_loss, const ad::Var& cls_loss,
                                const LambdaSchedule& s, std::size_t t);

}  // namespace glyce
