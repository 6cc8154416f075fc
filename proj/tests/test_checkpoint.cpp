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
#include <cstring>

#include "core/checkpoint.hpp"
#include "core/error.hpp"
#include "support/test_util.hpp"

namespace glyce {
namespace {

Checkpoint sample() {
  Checkpoint c;
  c.meta["config"] = "a=1\nb=two\n";
  c.meta["empty"] = "";
  c.meta["bin"] = std::string("x\0y", 3);
  Rng rng(5);
  c.tensors.emplace_back("param/w", ad::Tensor({2, 3}, {}));
  for (auto& v : c.tensors.back().second.values) v = rng.uniform(-1, 1);
  c.tensors.emplace_back("param/b", ad::Tensor({1}, {-0.0}));
  c.tensors.emplace_back("param/odd", ad::Tensor({1, 2}, {5e-324, 1.7976931348623157e308}));
  return c;
}

std::string parse_error(const std::vector<std::uint8_t>& b) {
  try {
    parse_checkpoint(b, "ck");
  } catch (const FormatError& e) {
    return e.what();
  }
  return {};
}

TEST(CheckpointTest, RoundtripIsBitIdentical) {
  const auto dir = testing::scratch_dir("ckpt_roundtrip");
  const Checkpoint a = sample();
  save_checkpoint(a, dir / "a.gckp");
  const Checkpoint b = load_checkpoint(dir / "a.gckp");
  EXPECT_EQ(a.meta, b.meta);
  ASSERT_EQ(a.tensors.size(), b.tensors.size());
  for (std::size_t i = 0; i < a.tensors.size(); ++i) {
    EXPECT_EQ(a.tensors[i].first, b.tensors[i].first);
    EXPECT_EQ(a.tensors[i].second.shape, b.tensors[i].second.shape);
    EXPECT_EQ(0, std::memcmp(a.tensors[i].second.values.data(), b.tensors[i].second.values.data(),
                             a.tensors[i].second.values.size() * sizeof(double)));
  }
  EXPECT_EQ(serialize_checkpoint(a), serialize_checkpoint(b));
  EXPECT_TRUE(std::signbit(b.find("param/b")->values[0]));
}

TEST(CheckpointTest, LayoutStartsWithMagicAndVersion) {
  const auto bytes = serialize_checkpoint(sample());
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "GCKP");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 0);
}

TEST(CheckpointTest, EveryTruncationRejected) {
  const auto good = serialize_checkpoint(sample());
  for (std::size_t n = 0; n < good.size(); ++n) {
    std::vector<std::uint8_t> cut(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(n));
    EXPECT_FALSE(parse_error(cut).empty()) << n;
  }
}

TEST(CheckpointTest, CorruptionsRejected) {
  const auto good = serialize_checkpoint(sample());
  auto bad = good;
  bad[1] = 'X';
  EXPECT_NE(parse_error(bad).find("magic"), std::string::npos);
  bad = good;
  bad[4] = 7;
  EXPECT_NE(parse_error(bad).find("version 7"), std::string::npos);
  bad = good;
  bad.push_back(0);
  EXPECT_NE(parse_error(bad).find("trailing"), std::string::npos);
}

TEST(CheckpointTest, ShapeMismatchNamesTensor) {
  Checkpoint c = sample();
  ParamSet ps;
  ps.add("w", {3, 2});
  try {
    read_tensors(c, "param/", ps);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("param/w"), std::string::npos) << e.what();
  }
  ParamSet missing;
  missing.add("nope", {1});
  EXPECT_THROW(read_tensors(c, "param/", missing), FormatError);
}

TEST(CheckpointTest, ReadTensorsCopiesValues) {
  ParamSet src;
  Rng rng(1);
  init_uniform(*src.add("x", {4}), 1.0, rng);
  Checkpoint c;
  add_tensors(c, "p/", src);
  ParamSet dst;
  dst.add("x", {4});
  read_tensors(c, "p/", dst);
  EXPECT_EQ(dst.get("x")->values, src.get("x")->values);
}

TEST(CheckpointTest, ExactDoubleText) {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-1e6, 1e6) * std::pow(10.0, rng.range(-300, 300) / 10);
    EXPECT_EQ(parse_exact_double(exact_double(v), "v"), v);
  }
  EXPECT_TRUE(std::isinf(parse_exact_double(exact_double(-INFINITY), "v")));
  EXPECT_THROW(parse_exact_double("1.5x", "v"), FormatError);
}

TEST(CheckpointTest, MissingFileIsIoError) {
  EXPECT_THROW(load_checkpoint("/nonexistent/x.gckp"), IoError);
}

}  // namespace
}  // namespace glyce
