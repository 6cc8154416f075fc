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
#include "core/trainer.hpp"
#include "support/test_util.hpp"
#include "support/tiny_run.hpp"

namespace glyce {
namespace {

using testing::tiny_config;
using testing::tiny_data;

std::map<std::string, std::vector<double>> snapshot(const GlyceModel& m, ParamGroup group) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& it : m.params().items())
    if (m.group_of(it.name) == group) out[it.name] = it.tensor->values;
  return out;
}

std::string history_text(const Trainer& t) {
  std::string s;
  for (const auto& r : t.history()) s += to_json_line(r) + "\n";
  return s;
}

// ---- model ----------------------------------------------------------------

TEST(ModelTest, ParameterGroupsFollowPrefixes) {
  const auto d = tiny_data();
  const RunConfig rc = tiny_config();
  GlyceModel m(ModelConfig::from(rc, d.atlas, d.corpus), 1);
  std::size_t n_ctx = 0, n_glyph = 0, n_task = 0;
  for (const auto& it : m.params().items()) {
    switch (m.group_of(it.name)) {
      case ParamGroup::kContext:
        EXPECT_EQ(it.name.rfind("ctx.", 0), 0u);
        ++n_ctx;
        break;
      case ParamGroup::kGlyph:
        EXPECT_TRUE(it.name.rfind("cnn.", 0) == 0 || it.name.rfind("fusion.", 0) == 0);
        ++n_glyph;
        break;
      case ParamGroup::kTask:
        EXPECT_TRUE(it.name.rfind("task.", 0) == 0 || it.name.rfind("head.", 0) == 0);
        ++n_task;
        break;
    }
  }
  EXPECT_GT(n_ctx, 0u);
  EXPECT_GT(n_glyph, 0u);
  EXPECT_GT(n_task, 0u);
  EXPECT_TRUE(m.params().contains("head.crf"));
  EXPECT_EQ(m.params().get("head.crf")->shape, (ad::Shape{6, 6}));
  EXPECT_EQ(m.tensors_in({ParamGroup::kGlyph}).size(), n_glyph);

  RunConfig plain = rc;
  plain.set("strategy", "context-only");
  GlyceModel c(ModelConfig::from(plain, d.atlas, d.corpus), 1);
  for (const auto& it : c.params().items()) EXPECT_NE(c.group_of(it.name), ParamGroup::kGlyph);
  EXPECT_EQ(c.config().task_layer.width, 8u);
  EXPECT_EQ(m.config().task_layer.width, 16u);
}

TEST(ModelTest, ForwardPredictsEveryExample) {
  for (const char* task : {"tagging", "classification", "pair"}) {
    const auto d = tiny_data(task);
    GlyceModel m(ModelConfig::from(tiny_config(task), d.atlas, d.corpus), 2);
    ad::Graph g;
    Binder bind(g);
    const std::vector<std::size_t> batch{0, 1, 2};
    const BatchOutput out = m.forward(bind, d.atlas, d.corpus, batch, true);
    EXPECT_TRUE(std::isfinite(out.task_loss.item())) << task;
    EXPECT_TRUE(std::isfinite(out.cls_loss.item())) << task;
    ASSERT_EQ(out.predictions.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& e = d.corpus.examples[batch[i]];
      const std::size_t want = std::string(task) == "tagging" ? e.s1.size() : 1;
      ASSERT_EQ(out.predictions[i].size(), want) << task;
      for (std::size_t y : out.predictions[i]) EXPECT_LT(y, d.corpus.n_labels());
    }
  }
}

TEST(ModelTest, TaskMustMatchCorpus) {
  const auto d = tiny_data();
  EXPECT_THROW(ModelConfig::from(tiny_config("pair"), d.atlas, d.corpus), ConfigError);
}

TEST(ModelTest, EndToEndGradientCheck) {
  for (const char* task : {"tagging", "pair"}) {
    const auto d = tiny_data(task, 8);
    GlyceModel m(ModelConfig::from(tiny_config(task), d.atlas, d.corpus), 4);
    testing::jitter_biases(m.params(), 5);
    // Short examples keep the finite-difference sweep quick.
    std::vector<std::size_t> batch;
    for (std::size_t i = 0; i < d.corpus.examples.size() && batch.size() < 2; ++i)
      if (d.corpus.examples[i].s1.size() <= 12) batch.push_back(i);
    ASSERT_EQ(batch.size(), 2u);
    std::vector<ad::TensorPtr> params;
    for (const auto& it : m.params().items()) params.push_back(it.tensor);
    const LambdaSchedule s{0.3, 0.8};
    const double err = ad::grad_check(
        [&](ad::Graph& g) {
          Binder bind(g);
          const BatchOutput out = m.forward(bind, d.atlas, d.corpus, batch, false);
          return combined_loss(out.task_loss, out.cls_loss, s, 1).total;
        },
        params);
    EXPECT_LT(err, 1e-4) << task;
  }
}

// ---- trainer configuration ------------------------------------------------

TEST(TrainerTest, StageLists) {
  EXPECT_EQ(stages_for("staged-joint", 1, 2, 3).size(), 3u);
  EXPECT_EQ(stages_for("glyph-joint", 1, 2, 3)[0].name, "B");
  EXPECT_EQ(stages_for("glyph-joint", 1, 2, 3)[1].epochs, 3u);
  EXPECT_EQ(stages_for("joint", 1, 2, 3).size(), 1u);
  EXPECT_EQ(stages_for("context-only", 1, 2, 3)[0].name, "C");
  EXPECT_THROW(stages_for("bogus", 1, 2, 3), ConfigError);

  RunConfig rc = tiny_config();
  rc.set("epochs_c", "0");
  EXPECT_THROW(TrainConfig::from(rc), ConfigError);
  rc = tiny_config();
  rc.set("lr", "0");
  EXPECT_THROW(TrainConfig::from(rc), ConfigError);
  rc = tiny_config();
  rc.set("lambda1", "1.5");
  EXPECT_THROW(TrainConfig::from(rc), ConfigError);
}

TEST(TrainerTest, VocabularyNotCoveredIsConfigError) {
  const auto d = tiny_data();
  const GlyphAtlas small = generate_synthetic_atlas(10, 2, 12, 1);
  EXPECT_THROW(Trainer(tiny_config(), small, d.corpus), ConfigError);
}

// ---- training semantics ---------------------------------------------------

TEST(TrainerTest, LambdaRecordedPerEpoch) {
  const auto d = tiny_data();
  RunConfig rc = tiny_config("tagging", "staged-joint");
  rc.set("lambda0", "0.3");
  rc.set("lambda1", "0.7");
  rc.set("patience", "100");
  Trainer t(rc, d.atlas, d.corpus);
  t.run();
  ASSERT_EQ(t.history().size(), 6u);
  for (const auto& r : t.history()) {
    EXPECT_EQ(r.lambda, 0.3 * std::pow(0.7, static_cast<double>(r.epoch)));
    EXPECT_EQ(r.lambda, lambda_at({0.3, 0.7}, r.epoch));
  }
  EXPECT_EQ(t.history()[0].stage, "A");
  EXPECT_EQ(t.history()[2].stage, "B");
  EXPECT_EQ(t.history()[5].stage, "C");
}

TEST(TrainerTest, ContextOnlyRecordsNoGlyphLoss) {
  const auto d = tiny_data();
  Trainer t(tiny_config("tagging", "context-only"), d.atlas, d.corpus);
  t.run();
  for (const auto& r : t.history()) {
    EXPECT_EQ(r.lambda, 0.0);
    EXPECT_EQ(r.cls_loss, 0.0);
    EXPECT_EQ(r.train_loss, r.task_loss);
  }
}

TEST(TrainerTest, StagedJointStageAFreezesGlyphPath) {
  const auto d = tiny_data();
  RunConfig rc = tiny_config("tagging", "staged-joint");
  rc.set("epochs_a", "3");
  rc.set("patience", "100");
  Trainer t(rc, d.atlas, d.corpus);
  std::map<std::string, std::vector<double>> before_glyph, before_ctx;
  bool checked = false;
  t.on_stage = [&](const std::string& stage, bool entering) {
    if (stage != "A") return;
    if (entering) {
      before_glyph = snapshot(t.model(), ParamGroup::kGlyph);
      before_ctx = snapshot(t.model(), ParamGroup::kContext);
    } else {
      EXPECT_EQ(snapshot(t.model(), ParamGroup::kGlyph), before_glyph);
      EXPECT_NE(snapshot(t.model(), ParamGroup::kContext), before_ctx);
      checked = true;
    }
  };
  t.run();
  EXPECT_TRUE(checked);
}

TEST(TrainerTest, GlyphJointStageBFreezesContextEncoder) {
  const auto d = tiny_data("pair");
  RunConfig rc = tiny_config("pair", "glyph-joint");
  rc.set("epochs_b", "3");
  rc.set("patience", "100");
  Trainer t(rc, d.atlas, d.corpus);
  std::map<std::string, std::vector<double>> before_ctx, before_glyph;
  bool checked = false;
  t.on_stage = [&](const std::string& stage, bool entering) {
    if (stage != "B") return;
    if (entering) {
      before_ctx = snapshot(t.model(), ParamGroup::kContext);
      before_glyph = snapshot(t.model(), ParamGroup::kGlyph);
    } else {
      EXPECT_EQ(snapshot(t.model(), ParamGroup::kContext), before_ctx);
      EXPECT_NE(snapshot(t.model(), ParamGroup::kGlyph), before_glyph);
      checked = true;
    }
  };
  t.run();
  EXPECT_TRUE(checked);
}

TEST(TrainerTest, LambdaZeroMatchesTaskOnlyLoop) {
  const auto d = tiny_data();
  RunConfig rc = tiny_config();
  rc.set("lambda0", "0");
  rc.set("epochs_c", "1");
  Trainer t(rc, d.atlas, d.corpus);
  t.run();

  GlyceModel m(ModelConfig::from(rc, d.atlas, d.corpus), rc.seed());
  Adam opt(rc.get_real("lr"));
  Rng rng(shuffle_seed(rc.seed()));
  testing::task_only_epoch(m, opt, rng, d.atlas, d.corpus, rc.get_size("batch_size"));
  for (const auto& it : m.params().items())
    EXPECT_EQ(t.model().params().get(it.name)->values, it.tensor->values) << it.name;
}

TEST(TrainerTest, IdenticalRunsAreBitIdentical) {
  const auto d = tiny_data("classification");
  const RunConfig rc = tiny_config("classification", "staged-joint");
  Trainer a(rc, d.atlas, d.corpus), b(rc, d.atlas, d.corpus);
  a.run();
  b.run();
  EXPECT_EQ(history_text(a), history_text(b));
  EXPECT_EQ(serialize_checkpoint(a.checkpoint()), serialize_checkpoint(b.checkpoint()));

  RunConfig other = rc;
  other.set("seed", "2");
  Trainer c(other, d.atlas, d.corpus);
  c.run();
  EXPECT_NE(history_text(a), history_text(c));
}

TEST(TrainerTest, ResumeEqualsUninterruptedRun) {
  const auto d = tiny_data();
  RunConfig rc = tiny_config("tagging", "staged-joint");
  rc.set("patience", "2");
  Trainer full(rc, d.atlas, d.corpus);
  full.run();
  const auto want = serialize_checkpoint(full.checkpoint());
  for (std::size_t k = 1; k <= 5; ++k) {
    Trainer first(rc, d.atlas, d.corpus);
    first.run(k);
    const Checkpoint ck = parse_checkpoint(serialize_checkpoint(first.checkpoint()), "mem");
    auto resumed = Trainer::resume(ck, d.atlas, d.corpus, &rc);
    resumed->run();
    EXPECT_EQ(history_text(*resumed), history_text(full)) << k;
    EXPECT_EQ(serialize_checkpoint(resumed->checkpoint()), want) << k;
  }
}

TEST(TrainerTest, ResumeAfterOneEpochMatchesNextEpoch) {
  const auto d = tiny_data("pair");
  const RunConfig rc = tiny_config("pair");
  Trainer two(rc, d.atlas, d.corpus);
  two.run(2);
  Trainer one(rc, d.atlas, d.corpus);
  one.run(1);
  auto resumed = Trainer::resume(one.checkpoint(), d.atlas, d.corpus);
  resumed->run(1);
  for (const auto& it : two.model().params().items())
    EXPECT_EQ(resumed->model().params().get(it.name)->values, it.tensor->values) << it.name;
}

TEST(TrainerTest, EarlyStoppingRestoresBestSnapshot) {
  const auto d = tiny_data("classification");
  RunConfig rc = tiny_config("classification");
  rc.set("epochs_c", "40");
  rc.set("patience", "2");
  Trainer t(rc, d.atlas, d.corpus);
  EXPECT_TRUE(t.run());
  ASSERT_TRUE(t.best_epoch().has_value());
  EXPECT_LT(t.history().size(), 40u);
  double best = -1.0;
  for (const auto& r : t.history()) best = std::max(best, r.dev.primary);
  EXPECT_EQ(t.history().at(*t.best_epoch()).dev.primary, best);
  EXPECT_EQ(t.evaluate(d.corpus.dev).primary, best);
}

TEST(TrainerTest, CallbackCanStopEarly) {
  const auto d = tiny_data();
  RunConfig rc = tiny_config();
  rc.set("epochs_c", "10");
  Trainer t(rc, d.atlas, d.corpus);
  t.on_epoch = [](const EpochRecord& r) { return r.epoch < 2; };
  EXPECT_TRUE(t.run());
  EXPECT_EQ(t.history().size(), 3u);
}

TEST(TrainerTest, DivergenceAbortsWithReport) {
  const auto d = tiny_data();
  Trainer t(tiny_config(), d.atlas, d.corpus);
  t.model().params().get("ctx.tok_emb")->values.assign(
      t.model().params().get("ctx.tok_emb")->size(), NAN);
  try {
    t.run();
    FAIL();
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("epoch 0"), std::string::npos) << msg;
    EXPECT_NE(msg.find("stage C"), std::string::npos) << msg;
  }
}

TEST(TrainerTest, CheckpointWithOtherGlyphWidthNamesTensor) {
  const auto d = tiny_data();
  const RunConfig rc = tiny_config();
  Trainer t(rc, d.atlas, d.corpus);
  t.run(1);
  const Checkpoint ck = t.checkpoint();

  RunConfig narrow = rc;
  narrow.set("d_glyph", "4");
  GlyceModel m(ModelConfig::from(narrow, d.atlas, d.corpus), 1);
  try {
    load_model_params(ck, m);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("param/cnn.gconv2.w"), std::string::npos) << e.what();
  }
  try {
    Trainer::resume(ck, d.atlas, d.corpus, &narrow);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("d_glyph"), std::string::npos) << e.what();
  }
}

TEST(TrainerTest, ModelFromCheckpointReproducesPredictions) {
  const auto d = tiny_data("pair");
  Trainer t(tiny_config("pair"), d.atlas, d.corpus);
  t.run();
  const auto dir = testing::scratch_dir("trainer_ckpt");
  save_checkpoint(t.checkpoint(), dir / "run.gckp");
  auto m = model_from_checkpoint(load_checkpoint(dir / "run.gckp"), d.atlas, d.corpus);
  for (const auto& it : t.model().params().items())
    EXPECT_EQ(m->params().get(it.name)->values, it.tensor->values);

  const GlyphAtlas other = generate_synthetic_atlas(21, 2, 12, 1);
  EXPECT_THROW(model_from_checkpoint(t.checkpoint(), other, d.corpus), VocabError);
}

TEST(TrainerTest, ResumeRejectsOtherDataset) {
  const auto d = tiny_data();
  Trainer t(tiny_config(), d.atlas, d.corpus);
  t.run(1);
  const auto other = gen_tagging_corpus(d.atlas, 40, 99);
  EXPECT_THROW(Trainer::resume(t.checkpoint(), d.atlas, other), FormatError);
}

}  // namespace
}  // namespace glyce
