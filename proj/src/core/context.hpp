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

// Contextual encoder, glyph/context fusion and the task-specific layers on
// top of the fused sequence. All transformer blocks are pre-norm:
//
//   x += attn(LN(x));  x += ffn(LN(x));  ...;  out = LN_final(x)

#pragma once

#include <string>
#include <vector>

#include "core/params.hpp"
#include "core/tensor.hpp"

namespace glyce {

/// Reserved token ids; character c maps to token c + kFirstChar.
namespace tokens {
constexpr std::size_t kCls = 0;
constexpr std::size_t kSep = 1;
constexpr std::size_t kPad = 2;
constexpr std::size_t kFirstChar = 3;
}  // namespace tokens

inline std::size_t token_of_char(std::size_t c) { return c + tokens::kFirstChar; }
inline bool is_special_token(std::size_t id) { return id < tokens::kFirstChar; }

// ---- transformer building blocks ----------------------------------------

void add_transformer_layer(ParamSet& ps, const std::string& prefix, std::size_t width,
                           std::size_t ffn_width, Rng& rng);

/// One pre-norm layer. key_valid (optional) masks attention keys.
ad::Var transformer_layer(Binder& bind, const ParamSet& ps, const std::string& prefix,
                          const ad::Var& x, std::size_t n_heads,
                          const std::vector<bool>& key_valid = {});

void add_layer_norm(ParamSet& ps, const std::string& prefix, std::size_t width);
ad::Var apply_layer_norm(Binder& bind, const ParamSet& ps, const std::string& prefix,
                         const ad::Var& x);

// ---- contextual encoder -------------------------------------------------

struct ContextEncoderConfig {
  std::size_t vocab = 0;  ///< including the reserved ids
  std::size_t d_ctx = 64;
  std::size_t n_layers = 2;
  std::size_t n_heads = 4;
  std::size_t max_len = 64;
  std::size_t ffn_mult = 2;

  void validate() const;
};

struct ContextEncoder {
  ContextEncoderConfig config;
  /// tok_emb, pos_emb, seg_emb, layer<i>.*, ln_f.*
  ParamSet params;
};

ContextEncoder make_context_encoder(const ContextEncoderConfig& config, std::uint64_t seed);

/// token ids -> [len, d_ctx]. PAD keys are masked out of attention. segments
/// (0/1 per position) default to all zero.
ad::Var encode_context(const ContextEncoder& enc, Binder& bind, const std::vector<std::size_t>& ids,
                       const std::vector<std::size_t>& segments = {});

// ---- fusion -------------------------------------------------------------

struct FusionConfig {
  std::size_t d_glyph = 64;
  std::size_t max_len = 64;
};

struct Fusion {
  FusionConfig config;
  /// glyph_pos [max_len, d_glyph], special [3, d_glyph] (rows CLS, SEP, PAD)
  ParamSet params;
};

Fusion make_fusion(const FusionConfig& config, std::uint64_t seed);

/// Learned glyph vector standing in for a reserved token; such tokens never
/// reach the CNN.
ad::Var special_glyph(const Fusion& f, Binder& bind, std::size_t token_id);

/// Row i: concat(ctx[i], glyph[i] + glyph_pos[i]). Width d_ctx + d_glyph.
ad::Var fuse(const Fusion& f, Binder& bind, const ad::Var& glyph_rows, const ad::Var& ctx_rows);

// ---- task-specific layers ------------------------------------------------

enum class TaskLayerKind { kTransformer, kBiLstm, kCnn, kNone };

std::string to_string(TaskLayerKind k);
TaskLayerKind parse_task_layer(const std::string& s);

struct TaskLayerConfig {
  TaskLayerKind kind = TaskLayerKind::kTransformer;
  std::size_t width = 128;
  std::size_t n_layers = 2;
  std::size_t n_heads = 4;
  std::size_t ffn_mult = 2;

  void validate() const;
};

struct TaskLayer {
  TaskLayerConfig config;
  ParamSet params;
};

TaskLayer make_task_layer(const TaskLayerConfig& config, std::uint64_t seed);

/// [len, width] -> [len, width]. Every row, including CLS and SEP, is kept.
ad::Var task_transform(const TaskLayer& layer, Binder& bind, const ad::Var& x,
                       const std::vector<bool>& key_valid = {});

}  // namespace glyce
