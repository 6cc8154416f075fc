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

#include "core/tianzige.hpp"

#include "core/error.hpp"
#include "core/ops.hpp"

namespace glyce {

namespace {

constexpr std::size_t kConv1Kernel = 5;
constexpr std::size_t kPool = 4;
// deep-residual: narrow residual trunk.
constexpr std::size_t kResidualWidthFactor = 2;

std::size_t residual_width(const TianzigeCnnConfig& c) { return c.c_mid * kResidualWidthFactor; }

std::size_t largest_common_divisor_at_most(std::size_t want, std::size_t a, std::size_t b) {
  for (std::size_t g = want; g > 1; --g)
    if (a % g == 0 && b % g == 0) return g;
  return 1;
}

}  // namespace

std::string to_string(CnnVariant v) {
  switch (v) {
    case CnnVariant::kTianzige: return "tianzige";
    case CnnVariant::kVanilla: return "vanilla";
    case CnnVariant::kDeepResidual: return "deep-residual";
  }
  return "?";
}

CnnVariant parse_cnn_variant(const std::string& s) {
  if (s == "tianzige") return CnnVariant::kTianzige;
  if (s == "vanilla") return CnnVariant::kVanilla;
  if (s == "deep-residual") return CnnVariant::kDeepResidual;
  throw ConfigError("unknown cnn variant '" + s + "' (tianzige|vanilla|deep-residual)");
}

TianzigeCnnConfig TianzigeCnnConfig::resolved() const {
  TianzigeCnnConfig c = *this;
  c.groups_1 = largest_common_divisor_at_most(std::max<std::size_t>(groups_1, 1), c_conv, c_mid);
  c.groups_2 = largest_common_divisor_at_most(std::max<std::size_t>(groups_2, 1), c_mid, d_glyph);
  return c;
}

void TianzigeCnnConfig::validate() const {
  if (n_scripts == 0 || c_conv == 0 || c_mid == 0 || d_glyph == 0 || groups_1 == 0 ||
      groups_2 == 0) {
    throw ConfigError("cnn: channel and group counts must be positive");
  }
  if (d_font < 8 || (d_font - kConv1Kernel + 1) % kPool != 0) {
    throw ConfigError("cnn: d_font=" + std::to_string(d_font) +
                      " must be >= 8 with (d_font - 4) divisible by 4");
  }
  if (c_conv % groups_1 != 0 || c_mid % groups_1 != 0) {
    throw ConfigError("cnn: groups_1=" + std::to_string(groups_1) + " does not divide c_conv=" +
                      std::to_string(c_conv) + " and c_mid=" + std::to_string(c_mid));
  }
  if (c_mid % groups_2 != 0 || d_glyph % groups_2 != 0) {
    throw ConfigError("cnn: groups_2=" + std::to_string(groups_2) + " does not divide c_mid=" +
                      std::to_string(c_mid) + " and d_glyph=" + std::to_string(d_glyph));
  }
}

TianzigeCnnParams init_params(const TianzigeCnnConfig& config, std::size_t n_chars,
                              std::uint64_t seed) {
  config.validate();
  if (n_chars == 0) throw ConfigError("cnn: n_chars must be positive");
  TianzigeCnnParams out;
  out.config = config;
  out.n_chars = n_chars;
  Rng rng(seed);
  ParamSet& ps = out.params;
  const auto& c = config;

  auto conv = [&](const std::string& name, std::size_t co, std::size_t ci_per_group,
                  std::size_t k) {
    auto w = ps.add(name + ".w", {co, ci_per_group, k, k});
    init_fan_in_uniform(*w, ci_per_group * k * k, rng);
    ps.add(name + ".b", {co});
  };

  switch (c.variant) {
    case CnnVariant::kTianzige:
      conv("conv1", c.c_conv, c.n_scripts, kConv1Kernel);
      conv("gconv1", c.c_mid, c.c_conv / c.groups_1, 1);
      conv("gconv2", c.d_glyph, c.c_mid / c.groups_2, c.grid());
      break;
    case CnnVariant::kVanilla:
      conv("conv1", c.c_conv, c.n_scripts, kConv1Kernel);
      conv("conv2", c.d_glyph, c.c_conv, 3);
      break;
    case CnnVariant::kDeepResidual: {
      const std::size_t r = residual_width(c);
      conv("stem", r, c.n_scripts, kConv1Kernel);
      for (const char* block : {"res1", "res2"}) {
        conv(std::string(block) + ".a", r, r, 2);
        conv(std::string(block) + ".b", r, r, 1);
      }
      auto w = ps.add("proj.w", {c.d_glyph, r});
      init_fan_in_uniform(*w, r, rng);
      ps.add("proj.b", {c.d_glyph});
      break;
    }
  }
  auto w = ps.add("cls.w", {n_chars, c.d_glyph});
  init_fan_in_uniform(*w, c.d_glyph, rng);
  ps.add("cls.b", {n_chars});
  return out;
}

ad::Var embed(const TianzigeCnnParams& p, Binder& bind, const ad::Var& glyph,
              std::vector<ad::Shape>* trace) {
  const auto& c = p.config;
  const ad::Shape want{c.n_scripts, c.d_font, c.d_font};
  if (glyph.shape() != want) {
    throw ShapeError("embed: glyph " + ad::shape_str(glyph.shape()) + ", expected " +
                     ad::shape_str(want));
  }
  auto note = [&](const ad::Var& v) {
    if (trace) trace->push_back(v.shape());
    return v;
  };
  auto W = [&](const std::string& n) { return bind(p.params.get(n)); };

  switch (c.variant) {
    case CnnVariant::kTianzige: {
      ad::Var h = note(ad::conv2d(glyph, W("conv1.w"), W("conv1.b"), 1, 1));
      h = note(ad::maxpool2d(ad::relu(h), kPool));
      h = note(ad::conv2d(h, W("gconv1.w"), W("gconv1.b"), 1, c.groups_1));
      h = note(ad::conv2d(ad::relu(h), W("gconv2.w"), W("gconv2.b"), 1, c.groups_2));
      return note(ad::reshape(h, {c.d_glyph}));
    }
    case CnnVariant::kVanilla: {
      ad::Var h = note(ad::relu(ad::conv2d(glyph, W("conv1.w"), W("conv1.b"), 1, 1)));
      h = note(ad::relu(ad::conv2d(h, W("conv2.w"), W("conv2.b"), 2, 1)));
      return note(ad::global_avg_pool(h));
    }
    case CnnVariant::kDeepResidual: {
      ad::Var h = note(ad::relu(ad::conv2d(glyph, W("stem.w"), W("stem.b"), 1, 1)));
      for (const char* block : {"res1", "res2"}) {
        const std::string b(block);
        ad::Var y = ad::relu(ad::conv2d(h, W(b + ".a.w"), W(b + ".a.b"), 1, 1));
        y = ad::conv2d(y, W(b + ".b.w"), W(b + ".b.b"), 1, 1);
        const std::size_t side = y.shape()[1];
        // Valid convs shrink the map; the skip path takes the matching corner crop.
        h = note(ad::relu(ad::add(y, ad::crop2d(h, 0, 0, side, side))));
      }
      return note(ad::dense(ad::global_avg_pool(h), W("proj.w"), W("proj.b")));
    }
  }
  throw ConfigError("embed: unknown variant");
}

ad::Tensor embed(const TianzigeCnnParams& p, const ad::Tensor& glyph) {
  ad::Graph g;
  Binder bind(g);
  return embed(p, bind, g.constant(glyph)).tensor();
}

ad::Var embed_batch(const TianzigeCnnParams& p, Binder& bind, const ad::Var& glyphs) {
  const auto& s = glyphs.shape();
  if (s.size() != 4 || s[0] == 0) {
    throw ShapeError("embed_batch: expected [B,n_scripts,d_font,d_font], got " + ad::shape_str(s));
  }
  std::vector<ad::Var> rows;
  rows.reserve(s[0]);
  for (std::size_t b = 0; b < s[0]; ++b) {
    ad::Var item = ad::reshape(ad::slice(glyphs, 0, b, b + 1), {s[1], s[2], s[3]});
    rows.push_back(embed(p, bind, item));
  }
  return ad::stack_rows(rows);
}

}  // namespace glyce
