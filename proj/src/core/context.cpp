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

#include "core/context.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/ops.hpp"

namespace glyce {

namespace {

constexpr double kEmbeddingBound = 0.1;

// Learned position table started from the usual sine/cosine pattern, so that
// relative offsets begin as linear maps of the absolute rows.
void init_sinusoid(ad::Tensor& t) {
  const std::size_t n = t.shape[0], d = t.shape[1];
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t i = 0; i < d; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(i / 2 * 2) / static_cast<double>(d));
      const double a = static_cast<double>(p) * rate;
      t.values[p * d + i] = (i % 2 == 0 ? std::sin(a) : std::cos(a));
    }
  }
}

void add_linear(ParamSet& ps, const std::string& name, std::size_t out, std::size_t in,
                Rng& rng, bool bias = true) {
  init_xavier_uniform(*ps.add(name + ".w", {out, in}), in, out, rng);
  if (bias) ps.add(name + ".b", {out});
}

ad::Var apply_linear(Binder& bind, const ParamSet& ps, const std::string& name,
                     const ad::Var& x) {
  const ad::Var w = bind(ps.get(name + ".w"));
  if (!ps.contains(name + ".b")) return ad::linear(x, w);
  return ad::linear(x, w, bind(ps.get(name + ".b")));
}

void require_width(const ad::Var& x, std::size_t width, const char* what) {
  if (x.shape().size() != 2 || x.shape()[1] != width) {
    throw ShapeError(std::string(what) + ": expected [len," + std::to_string(width) + "], got " +
                     ad::shape_str(x.shape()));
  }
}

// ---- recurrent and convolutional task layers ----

void add_lstm(ParamSet& ps, const std::string& prefix, std::size_t in, std::size_t hidden,
              Rng& rng) {
  init_xavier_uniform(*ps.add(prefix + ".wx", {4 * hidden, in}), in, 4 * hidden, rng);
  init_xavier_uniform(*ps.add(prefix + ".wh", {4 * hidden, hidden}), hidden, 4 * hidden, rng);
  auto b = ps.add(prefix + ".b", {4 * hidden});
  // Forget gate (second quarter) starts open.
  for (std::size_t i = hidden; i < 2 * hidden; ++i) b->values[i] = 1.0;
}

ad::Var run_lstm(Binder& bind, const ParamSet& ps, const std::string& prefix, const ad::Var& x,
                 std::size_t hidden, bool reverse) {
  const std::size_t len = x.shape()[0];
  const ad::Var xw = ad::linear(x, bind(ps.get(prefix + ".wx")), bind(ps.get(prefix + ".b")));
  const ad::Var wh = bind(ps.get(prefix + ".wh"));
  ad::Graph& g = bind.graph();
  ad::Var h = g.constant(ad::Tensor({hidden}, 0.0));
  ad::Var c = h;
  std::vector<ad::Var> out(len);
  for (std::size_t step = 0; step < len; ++step) {
    const std::size_t t = reverse ? len - 1 - step : step;
    const ad::Var gates = ad::add(ad::row(xw, t), ad::dense(h, wh));
    const ad::Var i = ad::sigmoid(ad::slice(gates, 0, 0, hidden));
    const ad::Var f = ad::sigmoid(ad::slice(gates, 0, hidden, 2 * hidden));
    const ad::Var u = ad::tanh(ad::slice(gates, 0, 2 * hidden, 3 * hidden));
    const ad::Var o = ad::sigmoid(ad::slice(gates, 0, 3 * hidden, 4 * hidden));
    c = ad::add(ad::mul(f, c), ad::mul(i, u));
    h = ad::mul(o, ad::tanh(c));
    out[t] = h;
  }
  return ad::stack_rows(out);
}

}  // namespace

void add_layer_norm(ParamSet& ps, const std::string& prefix, std::size_t width) {
  auto g = ps.add(prefix + ".g", {width});
  std::fill(g->values.begin(), g->values.end(), 1.0);
  ps.add(prefix + ".b", {width});
}

ad::Var apply_layer_norm(Binder& bind, const ParamSet& ps, const std::string& prefix,
                         const ad::Var& x) {
  return ad::layer_norm(x, bind(ps.get(prefix + ".g")), bind(ps.get(prefix + ".b")));
}

void add_transformer_layer(ParamSet& ps, const std::string& prefix, std::size_t width,
                           std::size_t ffn_width, Rng& rng) {
  add_layer_norm(ps, prefix + ".ln1", width);
  add_linear(ps, prefix + ".q", width, width, rng);
  // A key bias only shifts each score row by a constant, which softmax ignores.
  add_linear(ps, prefix + ".k", width, width, rng, false);
  add_linear(ps, prefix + ".v", width, width, rng);
  add_linear(ps, prefix + ".o", width, width, rng);
  add_layer_norm(ps, prefix + ".ln2", width);
  add_linear(ps, prefix + ".ff1", ffn_width, width, rng);
  add_linear(ps, prefix + ".ff2", width, ffn_width, rng);
}

ad::Var transformer_layer(Binder& bind, const ParamSet& ps, const std::string& prefix,
                          const ad::Var& x, std::size_t n_heads,
                          const std::vector<bool>& key_valid) {
  const std::size_t width = x.shape()[1];
  if (n_heads == 0 || width % n_heads != 0) {
    throw ConfigError("transformer: width " + std::to_string(width) +
                      " not divisible by heads " + std::to_string(n_heads));
  }
  const std::size_t dh = width / n_heads;
  const double inv = 1.0 / std::sqrt(static_cast<double>(dh));

  const ad::Var n1 = apply_layer_norm(bind, ps, prefix + ".ln1", x);
  const ad::Var q = apply_linear(bind, ps, prefix + ".q", n1);
  const ad::Var k = apply_linear(bind, ps, prefix + ".k", n1);
  const ad::Var v = apply_linear(bind, ps, prefix + ".v", n1);
  std::vector<ad::Var> heads;
  heads.reserve(n_heads);
  for (std::size_t h = 0; h < n_heads; ++h) {
    const ad::Var qh = ad::slice(q, 1, h * dh, (h + 1) * dh);
    const ad::Var kh = ad::slice(k, 1, h * dh, (h + 1) * dh);
    const ad::Var vh = ad::slice(v, 1, h * dh, (h + 1) * dh);
    const ad::Var att = ad::softmax_rows(ad::scale(ad::matmul_nt(qh, kh), inv), key_valid);
    heads.push_back(ad::matmul(att, vh));
  }
  const ad::Var mixed = n_heads == 1 ? heads[0] : ad::concat(heads, 1);
  ad::Var y = ad::add(x, apply_linear(bind, ps, prefix + ".o", mixed));

  const ad::Var n2 = apply_layer_norm(bind, ps, prefix + ".ln2", y);
  const ad::Var ff = apply_linear(
      bind, ps, prefix + ".ff2", ad::relu(apply_linear(bind, ps, prefix + ".ff1", n2)));
  return ad::add(y, ff);
}

// ---- contextual encoder ----

void ContextEncoderConfig::validate() const {
  if (vocab <= tokens::kFirstChar) throw ConfigError("context: vocab must exceed reserved ids");
  if (d_ctx == 0 || n_layers == 0 || max_len == 0 || ffn_mult == 0) {
    throw ConfigError("context: widths, layer count and max_len must be positive");
  }
  if (n_heads == 0 || d_ctx % n_heads != 0) {
    throw ConfigError("context: d_ctx=" + std::to_string(d_ctx) + " not divisible by heads=" +
                      std::to_string(n_heads));
  }
}

ContextEncoder make_context_encoder(const ContextEncoderConfig& config, std::uint64_t seed) {
  config.validate();
  ContextEncoder enc;
  enc.config = config;
  Rng rng(seed);
  auto& ps = enc.params;
  init_uniform(*ps.add("tok_emb", {config.vocab, config.d_ctx}), kEmbeddingBound, rng);
  init_sinusoid(*ps.add("pos_emb", {config.max_len, config.d_ctx}));
  init_uniform(*ps.add("seg_emb", {2, config.d_ctx}), kEmbeddingBound, rng);
  for (std::size_t i = 0; i < config.n_layers; ++i) {
    add_transformer_layer(ps, "layer" + std::to_string(i), config.d_ctx,
                          config.d_ctx * config.ffn_mult, rng);
  }
  add_layer_norm(ps, "ln_f", config.d_ctx);
  return enc;
}

ad::Var encode_context(const ContextEncoder& enc, Binder& bind, const std::vector<std::size_t>& ids,
                       const std::vector<std::size_t>& segments) {
  const auto& c = enc.config;
  const std::size_t len = ids.size();
  if (len == 0) throw ContractError("encode_context: empty input");
  if (len > c.max_len) {
    throw ContractError("encode_context: length " + std::to_string(len) + " exceeds max_len " +
                        std::to_string(c.max_len));
  }
  if (!segments.empty() && segments.size() != len) {
    throw ShapeError("encode_context: " + std::to_string(segments.size()) + " segment ids for " +
                     std::to_string(len) + " tokens");
  }
  std::vector<std::size_t> pos(len), seg(len, 0);
  std::vector<bool> valid(len);
  bool any_valid = false;
  for (std::size_t i = 0; i < len; ++i) {
    pos[i] = i;
    if (!segments.empty()) seg[i] = segments[i];
    valid[i] = ids[i] != tokens::kPad;
    any_valid |= valid[i];
  }
  if (!any_valid) throw ContractError("encode_context: input is all PAD");
  const bool has_pad = std::find(valid.begin(), valid.end(), false) != valid.end();

  ad::Var x = ad::add(ad::embedding(bind(enc.params.get("tok_emb")), ids),
                      ad::embedding(bind(enc.params.get("pos_emb")), pos));
  x = ad::add(x, ad::embedding(bind(enc.params.get("seg_emb")), seg));
  for (std::size_t i = 0; i < c.n_layers; ++i) {
    x = transformer_layer(bind, enc.params, "layer" + std::to_string(i), x, c.n_heads,
                          has_pad ? valid : std::vector<bool>{});
  }
  return apply_layer_norm(bind, enc.params, "ln_f", x);
}

// ---- fusion ----

Fusion make_fusion(const FusionConfig& config, std::uint64_t seed) {
  if (config.d_glyph == 0 || config.max_len == 0) {
    throw ConfigError("fusion: d_glyph and max_len must be positive");
  }
  Fusion f;
  f.config = config;
  Rng rng(seed);
  init_sinusoid(*f.params.add("glyph_pos", {config.max_len, config.d_glyph}));
  init_uniform(*f.params.add("special", {tokens::kFirstChar, config.d_glyph}), kEmbeddingBound,
               rng);
  return f;
}

ad::Var special_glyph(const Fusion& f, Binder& bind, std::size_t token_id) {
  if (!is_special_token(token_id)) {
    throw ContractError("special_glyph: token " + std::to_string(token_id) +
                        " is a character, not a reserved id");
  }
  return ad::row(bind(f.params.get("special")), token_id);
}

ad::Var fuse(const Fusion& f, Binder& bind, const ad::Var& glyph_rows, const ad::Var& ctx_rows) {
  require_width(glyph_rows, f.config.d_glyph, "fuse(glyph)");
  if (ctx_rows.shape().size() != 2) throw ShapeError("fuse: context rows must be rank 2");
  const std::size_t len = glyph_rows.shape()[0];
  if (ctx_rows.shape()[0] != len) {
    throw ShapeError("fuse: " + std::to_string(len) + " glyph rows vs " +
                     std::to_string(ctx_rows.shape()[0]) + " context rows");
  }
  if (len > f.config.max_len) {
    throw ContractError("fuse: length " + std::to_string(len) + " exceeds max_len " +
                        std::to_string(f.config.max_len));
  }
  const ad::Var pos = ad::slice(bind(f.params.get("glyph_pos")), 0, 0, len);
  return ad::concat({ctx_rows, ad::add(glyph_rows, pos)}, 1);
}

// ---- task layers ----

std::string to_string(TaskLayerKind k) {
  switch (k) {
    case TaskLayerKind::kTransformer: return "transformer";
    case TaskLayerKind::kBiLstm: return "bilstm";
    case TaskLayerKind::kCnn: return "cnn";
    case TaskLayerKind::kNone: return "none";
  }
  return "?";
}

TaskLayerKind parse_task_layer(const std::string& s) {
  if (s == "transformer") return TaskLayerKind::kTransformer;
  if (s == "bilstm") return TaskLayerKind::kBiLstm;
  if (s == "cnn") return TaskLayerKind::kCnn;
  if (s == "none") return TaskLayerKind::kNone;
  throw ConfigError("unknown task layer '" + s + "' (transformer|bilstm|cnn|none)");
}

void TaskLayerConfig::validate() const {
  if (width == 0) throw ConfigError("task layer: width must be positive");
  if (kind == TaskLayerKind::kTransformer && (n_heads == 0 || width % n_heads != 0)) {
    throw ConfigError("task layer: width " + std::to_string(width) + " not divisible by heads " +
                      std::to_string(n_heads));
  }
  if (kind == TaskLayerKind::kBiLstm && width % 2 != 0) {
    throw ConfigError("task layer: bilstm width must be even");
  }
}

TaskLayer make_task_layer(const TaskLayerConfig& config, std::uint64_t seed) {
  config.validate();
  TaskLayer t;
  t.config = config;
  Rng rng(seed);
  auto& ps = t.params;
  const std::size_t w = config.width;
  for (std::size_t i = 0; i < config.n_layers; ++i) {
    const std::string p = "layer" + std::to_string(i);
    switch (config.kind) {
      case TaskLayerKind::kTransformer:
        add_transformer_layer(ps, p, w, w * config.ffn_mult, rng);
        break;
      case TaskLayerKind::kBiLstm:
        add_lstm(ps, p + ".fwd", w, w / 2, rng);
        add_lstm(ps, p + ".bwd", w, w / 2, rng);
        break;
      case TaskLayerKind::kCnn:
        add_layer_norm(ps, p + ".ln", w);
        add_linear(ps, p + ".conv", w, 3 * w, rng);
        break;
      case TaskLayerKind::kNone:
        break;
    }
  }
  add_layer_norm(ps, "ln_f", w);
  return t;
}

ad::Var task_transform(const TaskLayer& layer, Binder& bind, const ad::Var& x,
                       const std::vector<bool>& key_valid) {
  const auto& c = layer.config;
  require_width(x, c.width, "task_transform");
  ad::Var h = x;
  if (c.kind != TaskLayerKind::kNone) {
    for (std::size_t i = 0; i < c.n_layers; ++i) {
      const std::string p = "layer" + std::to_string(i);
      switch (c.kind) {
        case TaskLayerKind::kTransformer:
          h = transformer_layer(bind, layer.params, p, h, c.n_heads, key_valid);
          break;
        case TaskLayerKind::kBiLstm: {
          const auto fwd = run_lstm(bind, layer.params, p + ".fwd", h, c.width / 2, false);
          const auto bwd = run_lstm(bind, layer.params, p + ".bwd", h, c.width / 2, true);
          h = ad::concat({fwd, bwd}, 1);
          break;
        }
        case TaskLayerKind::kCnn: {
          // Width-3 convolution along the sequence, zero padded at both ends.
          const ad::Var n = apply_layer_norm(bind, layer.params, p + ".ln", h);
          const ad::Var window = ad::concat({ad::shift_rows(n, 1), n, ad::shift_rows(n, -1)}, 1);
          h = ad::add(h, ad::relu(apply_linear(bind, layer.params, p + ".conv", window)));
          break;
        }
        case TaskLayerKind::kNone:
          break;
      }
    }
  }
  return apply_layer_norm(bind, layer.params, "ln_f", h);
}

}  // namespace glyce
