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

#include <gtest/gtest.h>

#include <cmath>

#include "core/error.hpp"
#include "core/grad_check.hpp"
#include "core/ops.hpp"
#include "core/tianzige.hpp"
#include "support/test_util.hpp"

namespace glyce {
namespace {

TianzigeCnnConfig small_config(CnnVariant v = CnnVariant::kTianzige) {
  TianzigeCnnConfig c;
  c.n_scripts = 2;
  c.c_conv = 8;
  c.c_mid = 4;
  c.d_glyph = 8;
  c.groups_1 = 2;
  c.groups_2 = 2;
  c.variant = v;
  return c;
}

TEST(TianzigeTest, ShapeChainForDefaultWidths) {
  for (std::size_t scripts : {1u, 2u, 8u}) {
    TianzigeCnnConfig c;
    c.n_scripts = scripts;
    const auto p = init_params(c, 10, 1);
    ad::Graph g;
    Binder bind(g);
    Rng rng(4);
    std::vector<ad::Shape> trace;
    const auto out =
        embed(p, bind, g.constant(*testing::random_tensor({scripts, 12, 12}, rng, 0, 1)), &trace);
    ASSERT_EQ(trace.size(), 5u);
    EXPECT_EQ(trace[0], (ad::Shape{64, 8, 8}));
    EXPECT_EQ(trace[1], (ad::Shape{64, 2, 2}));
    EXPECT_EQ(trace[2], (ad::Shape{16, 2, 2}));
    EXPECT_EQ(trace[3], (ad::Shape{64, 1, 1}));
    EXPECT_EQ(out.shape(), (ad::Shape{64}));
    EXPECT_EQ(p["conv1.w"]->shape, (ad::Shape{64, scripts, 5, 5}));
  }
}

TEST(TianzigeTest, GridIsTwoByTwoForAnyWidths) {
  for (std::size_t cc : {4u, 16u, 32u}) {
    auto c = small_config();
    c.c_conv = cc;
    const auto p = init_params(c, 3, 2);
    ad::Graph g;
    Binder bind(g);
    std::vector<ad::Shape> trace;
    embed(p, bind, g.constant(ad::Tensor({2, 12, 12}, 0.5)), &trace);
    EXPECT_EQ(trace[1], (ad::Shape{cc, 2, 2}));
  }
}

TEST(TianzigeTest, ClassifierShapes) {
  const auto p = init_params(TianzigeCnnConfig{}, 37, 1);
  EXPECT_EQ(p["cls.w"]->shape, (ad::Shape{37, 64}));
  EXPECT_EQ(p["cls.b"]->shape, (ad::Shape{37}));
}

TEST(TianzigeTest, ZeroGlyphGivesZeroEmbedding) {
  const auto p = init_params(TianzigeCnnConfig{}, 5, 3);
  const auto h = embed(p, ad::Tensor({2, 12, 12}, 0.0));
  for (double v : h.values) EXPECT_EQ(v, 0.0);
}

TEST(TianzigeTest, BiasesStartAtZero) {
  const auto p = init_params(TianzigeCnnConfig{}, 5, 3);
  for (const auto& it : p.params.items()) {
    if (it.name.size() > 2 && it.name.substr(it.name.size() - 2) == ".b") {
      for (double v : it.tensor->values) EXPECT_EQ(v, 0.0) << it.name;
    }
  }
}

TEST(TianzigeTest, InitStdMatchesUniformBound) {
  const auto p = init_params(TianzigeCnnConfig{}, 5, 11);
  const auto& w = p["conv1.w"]->values;
  const double b = std::sqrt(6.0 / (2 * 25));
  double mean = 0.0, sq = 0.0;
  for (double v : w) mean += v / w.size();
  for (double v : w) sq += (v - mean) * (v - mean) / w.size();
  const double expect = b / std::sqrt(3.0);
  EXPECT_NEAR(std::sqrt(sq), expect, 0.2 * expect);
  for (double v : w) EXPECT_LE(std::fabs(v), b);
}

TEST(TianzigeTest, InitIsDeterministic) {
  const auto a = init_params(TianzigeCnnConfig{}, 9, 42);
  const auto b = init_params(TianzigeCnnConfig{}, 9, 42);
  const auto c = init_params(TianzigeCnnConfig{}, 9, 43);
  ASSERT_EQ(a.params.size(), b.params.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    EXPECT_EQ(a.params.items()[i].tensor->values, b.params.items()[i].tensor->values);
    differs |= a.params.items()[i].tensor->values != c.params.items()[i].tensor->values;
  }
  EXPECT_TRUE(differs);
}

TEST(TianzigeTest, ConfigValidation) {
  auto c = small_config();
  c.d_font = 13;
  EXPECT_THROW(init_params(c, 4, 1), ConfigError);
  c = small_config();
  c.groups_1 = 3;
  EXPECT_THROW(init_params(c, 4, 1), ConfigError);
  c = small_config();
  c.groups_2 = 8;
  EXPECT_THROW(init_params(c, 4, 1), ConfigError);
  EXPECT_THROW(init_params(small_config(), 0, 1), ConfigError);
  // d_font 16 is admissible: 12x12 after conv, 3x3 grid.
  c = small_config();
  c.d_font = 16;
  EXPECT_EQ(c.grid(), 3u);
  const auto p = init_params(c, 2, 1);
  EXPECT_EQ(embed(p, ad::Tensor({2, 16, 16}, 0.3)).shape, (ad::Shape{8}));
}

TEST(TianzigeTest, ResolvedScalesGroupsDown) {
  TianzigeCnnConfig c;
  c.c_conv = 12;
  c.c_mid = 6;
  c.d_glyph = 12;
  const auto r = c.resolved();
  EXPECT_EQ(r.groups_1, 6u);
  EXPECT_EQ(r.groups_2, 6u);
  EXPECT_NO_THROW(r.validate());
  EXPECT_EQ(TianzigeCnnConfig{}.resolved().groups_1, 8u);
  EXPECT_EQ(TianzigeCnnConfig{}.resolved().groups_2, 16u);
}

TEST(TianzigeTest, WrongGlyphShapeRejected) {
  const auto p = init_params(small_config(), 3, 1);
  EXPECT_THROW(embed(p, ad::Tensor({1, 12, 12}, 0.0)), ShapeError);
  EXPECT_THROW(embed(p, ad::Tensor({2, 11, 12}, 0.0)), ShapeError);
}

TEST(TianzigeTest, GroupConvMatchesBlockDiagonalFullConv) {
  // Model-level: rebuild gconv1 as a dense conv with a block-diagonal kernel
  // and compare the whole embedding.
  auto c = small_config();
  const auto p = init_params(c, 3, 5);
  Rng rng(8);
  const auto glyph = testing::random_tensor({2, 12, 12}, rng, 0, 1);
  const auto ref = embed(p, *glyph);

  auto c_full = c;
  c_full.groups_1 = 1;
  auto full = init_params(c_full, 3, 5);
  for (const auto& it : p.params.items())
    if (it.name != "gconv1.w") full[it.name]->values = it.tensor->values;
  auto& wf = full["gconv1.w"]->values;
  std::fill(wf.begin(), wf.end(), 0.0);
  const std::size_t in_g = c.c_conv / c.groups_1, out_g = c.c_mid / c.groups_1;
  for (std::size_t o = 0; o < c.c_mid; ++o)
    for (std::size_t i = 0; i < in_g; ++i)
      wf[o * c.c_conv + (o / out_g) * in_g + i] = p["gconv1.w"]->values[o * in_g + i];
  EXPECT_LT(testing::max_abs_diff(embed(full, *glyph).values, ref.values), 1e-12);
}

void check_gradients(CnnVariant v) {
  const auto p = init_params(small_config(v), 3, 7);
  Rng rng(21);
  const auto glyph = testing::random_tensor({2, 12, 12}, rng, 0, 1);
  const auto proj = testing::random_tensor({1, 8}, rng);
  std::vector<ad::TensorPtr> params{glyph};
  for (const auto& it : p.params.items())
    if (it.name.rfind("cls.", 0) != 0) params.push_back(it.tensor);
  const double err = ad::grad_check(
      [&](ad::Graph& g) {
        Binder bind(g);
        const auto h = embed(p, bind, g.param(glyph));
        return ad::reshape(ad::dense(h, g.constant(*proj)), {1});
      },
      params);
  EXPECT_LT(err, 1e-4) << to_string(v);
}

TEST(TianzigeTest, GradientMatchesFiniteDifferences) { check_gradients(CnnVariant::kTianzige); }
TEST(TianzigeTest, VanillaGradient) { check_gradients(CnnVariant::kVanilla); }
TEST(TianzigeTest, DeepResidualGradient) { check_gradients(CnnVariant::kDeepResidual); }

TEST(TianzigeTest, VariantsShareSignature) {
  for (auto v : {CnnVariant::kTianzige, CnnVariant::kVanilla, CnnVariant::kDeepResidual}) {
    auto c = small_config(v);
    const auto p = init_params(c, 4, 2);
    EXPECT_EQ(embed(p, ad::Tensor({2, 12, 12}, 0.4)).shape, (ad::Shape{8})) << to_string(v);
    EXPECT_EQ(parse_cnn_variant(to_string(v)), v);
  }
  EXPECT_THROW(parse_cnn_variant("resnet"), ConfigError);
}

TEST(TianzigeTest, BatchMatchesSingleItemExactly) {
  const auto p = init_params(TianzigeCnnConfig{}, 4, 3);
  Rng rng(2);
  const auto batch = testing::random_tensor({4, 2, 12, 12}, rng, 0, 1);
  ad::Graph g;
  Binder bind(g);
  const auto out = embed_batch(p, bind, g.constant(*batch));
  ASSERT_EQ(out.shape(), (ad::Shape{4, 64}));
  for (std::size_t b = 0; b < 4; ++b) {
    std::vector<double> one(batch->values.begin() + b * 288, batch->values.begin() + (b + 1) * 288);
    const auto h = embed(p, ad::Tensor({2, 12, 12}, one));
    for (std::size_t j = 0; j < 64; ++j) EXPECT_EQ(out.values()[b * 64 + j], h.values[j]);
  }
}

TEST(TianzigeTest, BatchPermutationPermutesRows) {
  const auto p = init_params(small_config(), 4, 3);
  Rng rng(6);
  const auto batch = testing::random_tensor({3, 2, 12, 12}, rng, 0, 1);
  auto swapped = *batch;
  std::swap_ranges(swapped.values.begin(), swapped.values.begin() + 288,
                   swapped.values.begin() + 2 * 288);
  ad::Graph g;
  Binder bind(g);
  const auto a = embed_batch(p, bind, g.constant(*batch)).values();
  const auto b = embed_batch(p, bind, g.constant(swapped)).values();
  for (std::size_t j = 0; j < 8; ++j) {
    EXPECT_EQ(a[j], b[16 + j]);
    EXPECT_EQ(a[8 + j], b[8 + j]);
    EXPECT_EQ(a[16 + j], b[j]);
  }
  EXPECT_THROW(embed_batch(p, bind, g.constant(ad::Tensor({2, 12, 12}, 0.0))), ShapeError);
}

}  // namespace
}  // namespace glyce
