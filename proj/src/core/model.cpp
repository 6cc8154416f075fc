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

#include "core/model.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "core/error.hpp"
#include "core/heads.hpp"
#include "core/ops.hpp"

namespace glyce {

namespace {

enum SeedTag : std::uint64_t { kSeedCnn = 11, kSeedCtx, kSeedFusion, kSeedTask, kSeedHead };

}  // namespace

ModelConfig ModelConfig::from(const RunConfig& rc, const GlyphAtlas& atlas,
                              const LabeledCorpus& corpus) {
  ModelConfig m;
  m.task = corpus.task;
  if (rc.get("task") != to_string(corpus.task)) {
    throw ConfigError("config task '" + rc.get("task") + "' does not match corpus task '" +
                      to_string(corpus.task) + "'");
  }
  m.n_labels = corpus.n_labels();
  m.n_chars = atlas.n_chars();
  m.use_glyph = rc.get("strategy") != "context-only";
  m.max_len = rc.get_size("max_len");

  m.cnn.n_scripts = atlas.n_scripts();
  m.cnn.d_font = atlas.d_font();
  m.cnn.c_conv = rc.get_size("c_conv");
  m.cnn.c_mid = rc.get_size("c_mid");
  m.cnn.d_glyph = rc.get_size("d_glyph");
  m.cnn.groups_1 = rc.get_size("groups_1");
  m.cnn.groups_2 = rc.get_size("groups_2");
  m.cnn.variant = parse_cnn_variant(rc.get("cnn"));
  m.cnn = m.cnn.resolved();

  m.ctx.vocab = atlas.n_chars() + tokens::kFirstChar;
  m.ctx.d_ctx = rc.get_size("d_ctx");
  m.ctx.n_layers = rc.get_size("ctx_layers");
  m.ctx.n_heads = rc.get_size("ctx_heads");
  m.ctx.max_len = m.max_len;
  m.ctx.ffn_mult = rc.get_size("ffn_mult");

  m.task_layer.kind = parse_task_layer(rc.get("task_layer"));
  m.task_layer.width = m.ctx.d_ctx + (m.use_glyph ? m.cnn.d_glyph : 0);
  m.task_layer.n_layers = rc.get_size("task_layers");
  m.task_layer.n_heads = rc.get_size("task_heads");
  m.task_layer.ffn_mult = m.ctx.ffn_mult;
  return m;
}

GlyceModel::GlyceModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  if (config.n_labels < 1 || config.n_chars < 1) {
    throw ConfigError("model: label and character counts must be positive");
  }
  ctx_ = make_context_encoder(config.ctx, derive_seed(seed, kSeedCtx));
  all_.extend("ctx.", ctx_.params);
  if (config.use_glyph) {
    cnn_ = init_params(config.cnn, config.n_chars, derive_seed(seed, kSeedCnn));
    fusion_ = make_fusion({config.cnn.d_glyph, config.max_len}, derive_seed(seed, kSeedFusion));
    all_.extend("cnn.", cnn_.params);
    all_.extend("fusion.", fusion_.params);
  }
  task_ = make_task_layer(config.task_layer, derive_seed(seed, kSeedTask));
  all_.extend("task.", task_.params);

  Rng rng(derive_seed(seed, kSeedHead));
  const std::size_t w = config.task_layer.width, k = config.n_labels;
  init_xavier_uniform(*head_.add("w", {k, w}), w, k, rng);
  head_.add("b", {k});
  if (config.task == TaskKind::kTagging) head_.add("crf", {k + 2, k + 2});
  all_.extend("head.", head_);
}

ParamGroup GlyceModel::group_of(const std::string& name) const {
  if (name.rfind("ctx.", 0) == 0) return ParamGroup::kContext;
  if (name.rfind("cnn.", 0) == 0 || name.rfind("fusion.", 0) == 0) return ParamGroup::kGlyph;
  return ParamGroup::kTask;
}

std::unordered_set<const ad::Tensor*> GlyceModel::tensors_in(
    const std::vector<ParamGroup>& groups) const {
  std::unordered_set<const ad::Tensor*> out;
  for (const auto& it : all_.items())
    if (std::find(groups.begin(), groups.end(), group_of(it.name)) != groups.end())
      out.insert(it.tensor.get());
  return out;
}

BatchOutput GlyceModel::forward(Binder& bind, const GlyphAtlas& atlas, const LabeledCorpus& corpus,
                                const std::vector<std::size_t>& batch, bool decode) const {
  if (batch.empty()) throw ContractError("forward: empty batch");
  ad::Graph& g = bind.graph();
  BatchOutput out;

  // Each distinct character goes through the CNN once per batch.
  std::map<CharId, ad::Var> glyph;
  if (config_.use_glyph) {
    std::set<CharId> chars;
    for (std::size_t i : batch) {
      const auto& e = corpus.examples.at(i);
      chars.insert(e.s1.begin(), e.s1.end());
      chars.insert(e.s2.begin(), e.s2.end());
    }
    std::vector<ad::Var> hs;
    std::vector<std::size_t> ids;
    for (CharId c : chars) {
      if (c >= atlas.n_chars()) {
        throw VocabError("character id " + std::to_string(c) + " is not covered by the atlas");
      }
      const ad::Var h = embed(cnn_, bind, g.constant(atlas.lookup(c)));
      glyph.emplace(c, h);
      hs.push_back(h);
      ids.push_back(c);
    }
    out.cls_loss = mean_image_cls_loss(hs, ids, bind(cnn_.params.get("cls.w")),
                                       bind(cnn_.params.get("cls.b")));
  }

  const ad::Var head_w = bind(head_.get("w"));
  const ad::Var head_b = bind(head_.get("b"));
  std::vector<ad::Var> losses;
  losses.reserve(batch.size());
  for (std::size_t i : batch) {
    const auto& e = corpus.examples.at(i);
    const PackedPair packed = corpus.task == TaskKind::kPair
                                  ? pack_pair({e.s1.begin(), e.s1.end()},
                                              {e.s2.begin(), e.s2.end()}, config_.max_len)
                                  : pack_single({e.s1.begin(), e.s1.end()}, config_.max_len);
    ad::Var x = encode_context(ctx_, bind, packed.tokens, packed.segments);
    if (config_.use_glyph) {
      std::vector<ad::Var> rows;
      rows.reserve(packed.tokens.size());
      for (std::size_t tok : packed.tokens) {
        rows.push_back(is_special_token(tok)
                           ? special_glyph(fusion_, bind, tok)
                           : glyph.at(static_cast<CharId>(tok - tokens::kFirstChar)));
      }
      x = fuse(fusion_, bind, ad::stack_rows(rows), x);
    }
    const ad::Var h = task_transform(task_, bind, x);

    if (corpus.task == TaskKind::kTagging) {
      const std::size_t len = e.s1.size();
      const ad::Var emissions = ad::linear(ad::slice(h, 0, 1, len + 1), head_w, head_b);
      const ad::Var trans = bind(head_.get("crf"));
      losses.push_back(crf_nll(emissions, trans, e.tags));
      if (decode) out.predictions.push_back(crf_viterbi(emissions.tensor(), trans.tensor()).labels);
    } else {
      const ad::Var logits = cls_logits(h, head_w, head_b);
      losses.push_back(ad::softmax_cross_entropy(logits, e.label));
      if (decode) {
        const auto& z = logits.values();
        out.predictions.push_back(
            {static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin())});
      }
    }
  }
  out.task_loss = ad::mean(losses);
  return out;
}

std::vector<double> GlyceModel::glyph_embedding(const GlyphAtlas& atlas, CharId c) const {
  if (!config_.use_glyph) throw ContractError("glyph_embedding: model has no glyph path");
  return embed(cnn_, atlas.lookup(c)).values;
}

}  // namespace glyce
