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

#include <fstream>

#include "core/error.hpp"
#include "core/run_config.hpp"
#include "support/test_util.hpp"

namespace glyce {
namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

TEST(RunConfigTest, DefaultsCoverDocumentedValues) {
  const RunConfig rc;
  EXPECT_EQ(rc.get("strategy"), "joint");
  EXPECT_EQ(rc.get_real("lr"), 1e-3);
  EXPECT_EQ(rc.get_size("patience"), 10u);
  EXPECT_EQ(rc.get_size("epochs_a"), 20u);
  EXPECT_EQ(rc.get_size("epochs_b"), 20u);
  EXPECT_EQ(rc.get_size("epochs_c"), 60u);
  EXPECT_EQ(rc.get_real("lambda0"), 0.1);
  EXPECT_EQ(rc.get_real("lambda1"), 0.8);
  EXPECT_EQ(rc.get_size("chars"), 100u);
  EXPECT_EQ(rc.get_size("scripts"), 2u);
  EXPECT_EQ(rc.get_size("n_sentences"), 2000u);
  EXPECT_EQ(rc.get_size("n_docs"), 1000u);
  EXPECT_EQ(rc.get_size("n_pairs"), 1000u);
  EXPECT_EQ(rc.values().size(), RunConfig::keys().size());
}

TEST(RunConfigTest, UnknownKeyAndBadTypesRejected) {
  RunConfig rc;
  EXPECT_NE(error_of([&] { rc.set("d_glpyh", "3"); }).find("d_glpyh"), std::string::npos);
  EXPECT_THROW(rc.set("epochs_c", "-1"), ConfigError);
  EXPECT_THROW(rc.set("epochs_c", "2.5"), ConfigError);
  EXPECT_THROW(rc.set("lr", "fast"), ConfigError);
  EXPECT_THROW(rc.set("lr", "inf"), ConfigError);
  EXPECT_THROW(rc.set("cnn", ""), ConfigError);
  EXPECT_THROW(rc.get("nope"), ConfigError);
}

TEST(RunConfigTest, MergeTextReportsOriginAndLine) {
  RunConfig rc;
  rc.merge_text("# comment\n\nlr = 0.5  # trailing\nseed=7\n", "a.cfg");
  EXPECT_EQ(rc.get_real("lr"), 0.5);
  EXPECT_EQ(rc.seed(), 7u);
  const std::string msg = error_of([&] { rc.merge_text("seed=1\nbogus=2\n", "b.cfg"); });
  EXPECT_NE(msg.find("b.cfg:2"), std::string::npos) << msg;
  EXPECT_NE(error_of([&] { rc.merge_text("no equals sign", "c.cfg"); }).find("c.cfg:1"),
            std::string::npos);
}

TEST(RunConfigTest, ToTextRoundtrips) {
  RunConfig a;
  a.set("cnn", "vanilla");
  a.set("lr", "0.0025");
  RunConfig b;
  b.merge_text(a.to_text(), "echo");
  EXPECT_EQ(a, b);
}

TEST(RunConfigTest, MergeFile) {
  const auto dir = testing::scratch_dir("run_config");
  std::ofstream(dir / "x.cfg") << "d_glyph=32\n";
  RunConfig rc;
  rc.merge_file(dir / "x.cfg");
  EXPECT_EQ(rc.get_size("d_glyph"), 32u);
  EXPECT_THROW(rc.merge_file(dir / "missing.cfg"), IoError);
}

TEST(RunConfigTest, ArchitectureSubset) {
  RunConfig a;
  const auto arch = a.architecture();
  EXPECT_EQ(arch.count("lr"), 0u);
  EXPECT_EQ(arch.count("seed"), 0u);
  EXPECT_EQ(arch.at("d_glyph"), "64");
  EXPECT_EQ(arch.at("glyph_path"), "on");
  RunConfig b = a;
  b.set("strategy", "staged-joint");
  EXPECT_EQ(a.architecture(), b.architecture());
  b.set("strategy", "context-only");
  EXPECT_EQ(b.architecture().at("glyph_path"), "off");
}

}  // namespace
}  // namespace glyce
