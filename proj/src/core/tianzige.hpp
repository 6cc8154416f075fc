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

// Glyph encoders. The tianzige pipeline for d_font = 12:
//
//   [S,12,12] --conv k5--> [c_conv,8,8] --relu, maxpool 4--> [c_conv,2,2]
//             --group conv k1 (groups_1)--> [c_mid,2,2] --relu-->
//             --group conv k2 (groups_2)--> [d_glyph,1,1] --> [d_glyph]
//
// Two baselines share the signature: `vanilla` (two plain convs and a global
// pool) and `deep-residual` (a stem conv plus two residual blocks).

#pragma once

#include <string>
#include <vector>

#include "core/params.hpp"
#include "core/tensor.hpp"

namespace glyce {

enum class CnnVariant { kTianzige, kVanilla, kDeepResidual };

std::string to_string(CnnVariant v);
CnnVariant parse_cnn_variant(const std::string& s);

struct TianzigeCnnConfig {
  std::size_t n_scripts = 2;
  std::size_t d_font = 12;
  std::size_t c_conv = 64;
  std::size_t c_mid = 16;
  std::size_t d_glyph = 64;
  std::size_t groups_1 = 8;
  std::size_t groups_2 = 16;
  CnnVariant variant = CnnVariant::kTianzige;

  /// Side of the pooled grid; 2 (the tianzige) when d_font = 12.
  std::size_t grid() const { return (d_font - 4) / 4; }
  /// Copy with group counts lowered to the largest values that divide both
  /// adjacent channel counts.
  TianzigeCnnConfig resolved() const;
  /// Throws ConfigError on any inconsistency.
  void validate() const;
};

struct TianzigeCnnParams {
  TianzigeCnnConfig config;
  std::size_t n_chars = 0;
  /// Conv stack plus the image-classification head "cls.w" [n_chars, d_glyph]
  /// and "cls.b" [n_chars].
  ParamSet params;

  const ad::TensorPtr& operator[](const std::string& name) const { return params.get(name); }
};

/// Fan-in scaled uniform weights, zero biases. Deterministic per seed.
TianzigeCnnParams init_params(const TianzigeCnnConfig& config, std::size_t n_chars,
                              std::uint64_t seed);

/// Glyph [n_scripts, d_font, d_font] -> h_image [d_glyph]. When `trace` is
/// given it receives the shape after every stage.
ad::Var embed(const TianzigeCnnParams& p, Binder& bind, const ad::Var& glyph,
              std::vector<ad::Shape>* trace = nullptr);

/// Convenience: evaluates embed in a private graph.
ad::Tensor embed(const TianzigeCnnParams& p, const ad::Tensor& glyph);

/// glyphs [B, n_scripts, d_font, d_font] -> [B, d_glyph]; row b is embed of
/// glyph b.
ad::Var embed_batch(const TianzigeCnnParams& p, Binder& bind, const ad::Var& glyphs);

}  // namespace glyce
