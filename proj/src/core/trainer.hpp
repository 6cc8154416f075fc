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

// Staged training. Stage A trains the context encoder and task layers with
// the glyph path frozen, stage B freezes the context encoder, stage C trains
// everything:
//
//   staged-joint  A -> B -> C
//   glyph-joint        B -> C
//   joint                   C
//   context-only            C   (no glyph path at all)

#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core/checkpoint.hpp"
#include "core/metrics.hpp"
#include "core/model.hpp"
#include "core/optim.hpp"

namespace glyce {

struct Stage {
  std::string name;  ///< "A", "B" or "C"
  std::size_t epochs = 0;
};

struct TrainConfig {
  std::string strategy = "joint";
  std::vector<Stage> stages;
  double lr = 1e-3;
  std::size_t batch_size = 16;
  LambdaSchedule schedule;
  std::uint64_t seed = 1;
  std::size_t eval_every = 1;
  std::size_t patience = 10;

  static TrainConfig from(const RunConfig& rc);
  /// ConfigError unless stages are non-empty and rates positive.
  void validate() const;
};

/// Stage list of a strategy name; ConfigError for unknown names.
std::vector<Stage> stages_for(const std::string& strategy, std::size_t epochs_a,
                              std::size_t epochs_b, std::size_t epochs_c);

/// Groups held fixed during a stage.
std::vector<ParamGroup> frozen_groups(const std::string& stage);

/// Seed of the generator that shuffles training order.
std::uint64_t shuffle_seed(std::uint64_t seed);

class Trainer {
 public:
  Trainer(const RunConfig& rc, const GlyphAtlas& atlas, const LabeledCorpus& corpus);

  /// Continues a saved run. The model is rebuilt from the checkpoint's own
  /// config; when `expected` is given its architecture must match. FormatError
  /// names the offending key or tensor.
  static std::unique_ptr<Trainer> resume(const Checkpoint& ck, const GlyphAtlas& atlas,
                                         const LabeledCorpus& corpus,
                                         const RunConfig* expected = nullptr);

  /// Trains until every stage ends or `max_epochs` more epochs have run.
  /// On completion the best dev snapshot is restored. Returns finished().
  bool run(std::size_t max_epochs = std::numeric_limits<std::size_t>::max());
  bool finished() const { return finished_; }

  /// Called after each epoch; returning false stops the run early (the
  /// best snapshot is still restored).
  std::function<bool(const EpochRecord&)> on_epoch;
  /// Called with (stage, entering) around each stage.
  std::function<void(const std::string&, bool)> on_stage;

  Checkpoint checkpoint() const;
  const std::vector<EpochRecord>& history() const { return history_; }
  DevMetrics evaluate(const std::vector<std::size_t>& split) const;

  const RunConfig& run_config() const { return rc_; }
  const TrainConfig& config() const { return tc_; }
  const GlyceModel& model() const { return *model_; }
  std::size_t epoch() const { return epoch_; }
  std::optional<std::size_t> best_epoch() const { return best_epoch_; }

 private:
  void train_epoch(const Stage& stage);
  void finish();

  RunConfig rc_;
  TrainConfig tc_;
  const GlyphAtlas& atlas_;
  const LabeledCorpus& corpus_;
  std::unique_ptr<GlyceModel> model_;
  Adam adam_;
  Rng rng_;

  std::size_t epoch_ = 0;           // global epoch counter t
  std::size_t stage_index_ = 0;
  std::size_t epoch_in_stage_ = 0;
  std::size_t bad_evals_ = 0;
  double stage_best_ = -std::numeric_limits<double>::infinity();
  double best_primary_ = -std::numeric_limits<double>::infinity();
  std::optional<std::size_t> best_epoch_;
  std::optional<ParamSet> best_;
  DevMetrics last_dev_;
  bool finished_ = false;
  std::vector<EpochRecord> history_;
};

/// Predicts `split` in batches and scores it: span F1 (primary) and token
/// accuracy for tagging, accuracy (primary) and macro P/R/F1 otherwise.
DevMetrics evaluate_model(const GlyceModel& model, const GlyphAtlas& atlas,
                          const LabeledCorpus& corpus, const std::vector<std::size_t>& split,
                          std::size_t batch_size);

/// Run config stored in a trainer checkpoint; FormatError if absent or bad.
RunConfig checkpoint_config(const Checkpoint& ck);

/// "NxSxD:hash" identity of an atlas, stored in checkpoints.
std::string atlas_signature(const GlyphAtlas& a);

/// Rebuilds a model from a checkpoint's config and loads its parameters.
/// VocabError when the atlas differs from the training atlas.
std::unique_ptr<GlyceModel> model_from_checkpoint(const Checkpoint& ck, const GlyphAtlas& atlas,
                                                  const LabeledCorpus& corpus);
/// Loads "param/*" tensors into an existing model; FormatError names the
/// first missing or mismatched tensor.
void load_model_params(const Checkpoint& ck, const GlyceModel& model);

}  // namespace glyce
