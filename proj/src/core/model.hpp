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

// The full glyph-aware model: glyph CNN and context encoder side by side,
// fused per position, task layers, then a CRF or CLS head.

#pragma once

#include <map>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "core/atlas.hpp"
#include "core/context.hpp"
#include "core/corpus.hpp"
#include "core/objectives.hpp"
#include "core/run_config.hpp"
#include "core/tianzige.hpp"

namespace glyce {

enum class ParamGroup { kContext, kGlyph, kTask };

struct ModelConfig {
  TaskKind task = TaskKind::kTagging;
  std::size_t n_labels = 0;
  std::uint32_t n_chars = 0;
  bool use_glyph = true;
  TianzigeCnnConfig cnn;
  ContextEncoderConfig ctx;
  TaskLayerConfig task_layer;
  std::size_t max_len = 64;

  /// Derives every width from the run config, atlas and corpus.
  static ModelConfig from(const RunConfig& rc, const GlyphAtlas& atlas,
                          const LabeledCorpus& corpus);
};

/// Forward products of one batch.
struct BatchOutput {
  ad::Var task_loss;  ///< mean over examples
  ad::Var cls_loss;   ///< mean over distinct characters; invalid without glyph path
  /// Per example: tag sequence (tagging) or a single class.
  std::vector<std::vector<std::size_t>> predictions;
};

class GlyceModel {
 public:
  GlyceModel(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  /// Every parameter under a stable prefixed name.
  const ParamSet& params() const { return all_; }
  ParamGroup group_of(const std::string& name) const;
  /// Tensors of the given groups, for freezing.
  std::unordered_set<const ad::Tensor*> tensors_in(const std::vector<ParamGroup>& groups) const;

  /// Builds the graph for `batch` (indices into corpus.examples). When
  /// `decode` is set, predictions are filled in.
  BatchOutput forward(Binder& bind, const GlyphAtlas& atlas, const LabeledCorpus& corpus,
                      const std::vector<std::size_t>& batch, bool decode) const;

  /// h_image for one character.
  std::vector<double> glyph_embedding(const GlyphAtlas& atlas, CharId c) const;

  const TianzigeCnnParams& cnn() const { return cnn_; }

 private:
  ModelConfig config_;
  TianzigeCnnParams cnn_;
  ContextEncoder ctx_;
  Fusion fusion_;
  TaskLayer task_;
  ParamSet head_;
  ParamSet all_;
};

}  // namespace glyce
