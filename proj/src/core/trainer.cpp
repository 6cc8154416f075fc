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

#include "core/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "core/error.hpp"
#include "core/ops.hpp"

namespace glyce {

std::string atlas_signature(const GlyphAtlas& a) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a over the pixel block
  for (std::uint8_t b : a.raw()) {
    h ^= b;
    h *= 1099511628211ull;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return std::to_string(a.n_chars()) + "x" + std::to_string(a.n_scripts()) + "x" +
         std::to_string(a.d_font()) + ":" + hex;
}

namespace {

constexpr std::uint64_t kShuffleTag = 21;
constexpr const char* kFormat = "glyce-train-1";

std::size_t parse_size(const std::string& s, const std::string& key) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty()) throw FormatError("checkpoint: meta '" + key + "' is not a count");
  return static_cast<std::size_t>(v);
}

}  // namespace

std::vector<Stage> stages_for(const std::string& strategy, std::size_t epochs_a,
                              std::size_t epochs_b, std::size_t epochs_c) {
  if (strategy == "staged-joint") return {{"A", epochs_a}, {"B", epochs_b}, {"C", epochs_c}};
  if (strategy == "glyph-joint") return {{"B", epochs_b}, {"C", epochs_c}};
  if (strategy == "joint" || strategy == "context-only") return {{"C", epochs_c}};
  throw ConfigError("unknown strategy '" + strategy +
                    "' (staged-joint|glyph-joint|joint|context-only)");
}

std::vector<ParamGroup> frozen_groups(const std::string& stage) {
  if (stage == "A") return {ParamGroup::kGlyph};
  if (stage == "B") return {ParamGroup::kContext};
  return {};
}

std::uint64_t shuffle_seed(std::uint64_t seed) { return derive_seed(seed, kShuffleTag); }

TrainConfig TrainConfig::from(const RunConfig& rc) {
  TrainConfig c;
  c.strategy = rc.get("strategy");
  c.stages = stages_for(c.strategy, rc.get_size("epochs_a"), rc.get_size("epochs_b"),
                        rc.get_size("epochs_c"));
  c.lr = rc.get_real("lr");
  c.batch_size = rc.get_size("batch_size");
  c.schedule = {rc.get_real("lambda0"), rc.get_real("lambda1")};
  c.seed = rc.seed();
  c.eval_every = rc.get_size("eval_every");
  c.patience = rc.get_size("patience");
  c.validate();
  return c;
}

void TrainConfig::validate() const {
  if (stages.empty()) throw ConfigError("strategy '" + strategy + "' has no stages");
  std::size_t total = 0;
  for (const auto& s : stages) total += s.epochs;
  if (total == 0) throw ConfigError("every stage of '" + strategy + "' has zero epochs");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (eval_every == 0) throw ConfigError("eval_every must be positive");
  if (patience == 0) throw ConfigError("patience must be positive");
  schedule.validate();
}

Trainer::Trainer(const RunConfig& rc, const GlyphAtlas& atlas, const LabeledCorpus& corpus)
    : rc_(rc),
      tc_(TrainConfig::from(rc)),
      atlas_(atlas),
      corpus_(corpus),
      adam_(tc_.lr),
      rng_(shuffle_seed(tc_.seed)) {
  try {
    corpus.require_covered_by(atlas);
  } catch (const VocabError& e) {
    throw ConfigError(e.what());
  }
  if (corpus.train.empty() || corpus.dev.empty()) {
    throw ContractError("training needs non-empty train and dev splits");
  }
  model_ = std::make_unique<GlyceModel>(ModelConfig::from(rc, atlas, corpus), tc_.seed);
}

DevMetrics evaluate_model(const GlyceModel& model, const GlyphAtlas& atlas,
                          const LabeledCorpus& corpus, const std::vector<std::size_t>& split,
                          std::size_t batch_size) {
  if (split.empty()) throw ContractError("evaluate: empty split");
  if (batch_size == 0) throw ContractError("evaluate: batch size must be positive");
  const auto all = model.tensors_in({ParamGroup::kContext, ParamGroup::kGlyph, ParamGroup::kTask});
  std::vector<std::vector<std::size_t>> pred;
  pred.reserve(split.size());
  for (std::size_t at = 0; at < split.size(); at += batch_size) {
    const std::vector<std::size_t> batch(split.begin() + at,
                                         split.begin() + std::min(split.size(), at + batch_size));
    ad::Graph g;
    Binder bind(g, all);
    auto out = model.forward(bind, atlas, corpus, batch, true);
    for (auto& p : out.predictions) pred.push_back(std::move(p));
  }

  DevMetrics m;
  if (corpus.task == TaskKind::kTagging) {
    std::vector<std::vector<std::string>> p, g;
    std::vector<std::size_t> flat_p, flat_g;
    for (std::size_t i = 0; i < split.size(); ++i) {
      const auto& gold = corpus.examples[split[i]].tags;
      p.emplace_back();
      g.emplace_back();
      for (std::size_t j = 0; j < gold.size(); ++j) {
        p.back().push_back(corpus.label_names.at(pred[i][j]));
        g.back().push_back(corpus.label_names.at(gold[j]));
      }
      flat_p.insert(flat_p.end(), pred[i].begin(), pred[i].end());
      flat_g.insert(flat_g.end(), gold.begin(), gold.end());
    }
    const SpanF1 f = tagging_f1(p, g, corpus.scheme);
    m.precision = f.precision;
    m.recall = f.recall;
    m.f1 = f.f1;
    m.accuracy = accuracy(flat_p, flat_g);
    m.primary = m.f1;
  } else {
    std::vector<std::size_t> p, g;
    for (std::size_t i = 0; i < split.size(); ++i) {
      p.push_back(pred[i].at(0));
      g.push_back(corpus.examples[split[i]].label);
    }
    const SpanF1 f = macro_prf(p, g);
    m.precision = f.precision;
    m.recall = f.recall;
    m.f1 = f.f1;
    m.accuracy = accuracy(p, g);
    m.primary = m.accuracy;
  }
  return m;
}

DevMetrics Trainer::evaluate(const std::vector<std::size_t>& split) const {
  return evaluate_model(*model_, atlas_, corpus_, split, tc_.batch_size);
}

void Trainer::train_epoch(const Stage& stage) {
  const auto frozen = model_->tensors_in(frozen_groups(stage.name));
  const bool glyph = model_->config().use_glyph;
  const double lambda = glyph ? lambda_at(tc_.schedule, epoch_) : 0.0;

  std::vector<std::size_t> order = corpus_.train;
  rng_.shuffle(order);

  double sum_total = 0.0, sum_task = 0.0, sum_cls = 0.0;
  std::size_t n_batches = 0;
  for (std::size_t at = 0; at < order.size(); at += tc_.batch_size) {
    const std::vector<std::size_t> batch(order.begin() + at,
                                         order.begin() + std::min(order.size(), at + tc_.batch_size));
    ad::Graph g;
    Binder bind(g, frozen);
    const BatchOutput out = model_->forward(bind, atlas_, corpus_, batch, false);
    const double task = out.task_loss.item();
    const double cls = glyph ? out.cls_loss.item() : 0.0;
    ad::Var total = out.task_loss;
    if (glyph && std::isfinite(task) && std::isfinite(cls)) {
      total = combined_loss(out.task_loss, out.cls_loss, tc_.schedule, epoch_).total;
    }
    if (!std::isfinite(task) || !std::isfinite(cls) || !std::isfinite(total.item())) {
      std::ostringstream os;
      os << "training diverged at epoch " << epoch_ << " (stage " << stage.name << ", batch "
         << n_batches << "): task loss " << task << ", cls loss " << cls << ", lambda " << lambda;
      throw NumericError(os.str());
    }
    model_->params().zero_grad();
    g.backward(total);
    adam_.step(model_->params(), frozen);
    sum_total += total.item();
    sum_task += task;
    sum_cls += cls;
    ++n_batches;
  }

  EpochRecord rec;
  rec.epoch = epoch_;
  rec.stage = stage.name;
  rec.lambda = lambda;
  rec.train_loss = sum_total / static_cast<double>(n_batches);
  rec.task_loss = sum_task / static_cast<double>(n_batches);
  rec.cls_loss = sum_cls / static_cast<double>(n_batches);

  ++epoch_in_stage_;
  const bool stage_over = epoch_in_stage_ >= stage.epochs;
  if (epoch_in_stage_ % tc_.eval_every == 0 || stage_over) {
    last_dev_ = evaluate(corpus_.dev);
    if (last_dev_.primary > best_primary_) {
      best_primary_ = last_dev_.primary;
      best_epoch_ = epoch_;
      best_ = model_->params().clone();
    }
    if (last_dev_.primary > stage_best_) {
      stage_best_ = last_dev_.primary;
      bad_evals_ = 0;
    } else {
      ++bad_evals_;
    }
  }
  rec.dev = last_dev_;
  history_.push_back(rec);
  ++epoch_;
}

bool Trainer::run(std::size_t max_epochs) {
  std::size_t done = 0;
  while (!finished_) {
    // Skip past exhausted stages first so a run that just ended is closed.
    while (stage_index_ < tc_.stages.size()) {
      const Stage& st = tc_.stages[stage_index_];
      if (epoch_in_stage_ < st.epochs && bad_evals_ < tc_.patience) break;
      if (on_stage && epoch_in_stage_ > 0) on_stage(st.name, false);
      ++stage_index_;
      epoch_in_stage_ = 0;
      bad_evals_ = 0;
      stage_best_ = -std::numeric_limits<double>::infinity();
    }
    if (stage_index_ >= tc_.stages.size()) {
      finish();
      break;
    }
    if (done >= max_epochs) break;
    const Stage& stage = tc_.stages[stage_index_];
    if (on_stage && epoch_in_stage_ == 0) on_stage(stage.name, true);
    train_epoch(stage);
    ++done;
    if (on_epoch && !on_epoch(history_.back())) {
      if (on_stage) on_stage(stage.name, false);
      finish();
    }
  }
  return finished_;
}

void Trainer::finish() {
  if (best_) model_->params().copy_values_from(*best_);
  finished_ = true;
  stage_index_ = tc_.stages.size();
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint ck;
  ck.meta["format"] = kFormat;
  ck.meta["config"] = rc_.to_text();
  ck.meta["dataset"] = corpus_.fingerprint();
  ck.meta["atlas"] = atlas_signature(atlas_);
  ck.meta["epoch"] = std::to_string(epoch_);
  ck.meta["stage_index"] = std::to_string(stage_index_);
  ck.meta["epoch_in_stage"] = std::to_string(epoch_in_stage_);
  ck.meta["bad_evals"] = std::to_string(bad_evals_);
  ck.meta["stage_best"] = exact_double(stage_best_);
  ck.meta["best_primary"] = exact_double(best_primary_);
  ck.meta["best_epoch"] = best_epoch_ ? std::to_string(*best_epoch_) : "";
  ck.meta["finished"] = finished_ ? "1" : "0";
  ck.meta["rng"] = rng_.state();
  std::string hist;
  for (const auto& r : history_) hist += to_json_line(r) + "\n";
  ck.meta["history"] = hist;
  ck.meta["last_dev"] = to_json_line({0, "", 0, 0, 0, 0, last_dev_});

  add_tensors(ck, "param/", model_->params());
  if (best_) add_tensors(ck, "best/", *best_);
  for (const auto& [name, slot] : adam_.slots()) {
    const ad::Shape shape = model_->params().get(name)->shape;
    ck.tensors.emplace_back("adam.m/" + name, ad::Tensor(shape, slot.m));
    ck.tensors.emplace_back("adam.v/" + name, ad::Tensor(shape, slot.v));
    ck.tensors.emplace_back("adam.steps/" + name,
                            ad::Tensor({1}, {static_cast<double>(slot.steps)}));
  }
  return ck;
}

void load_model_params(const Checkpoint& ck, const GlyceModel& model) {
  read_tensors(ck, "param/", model.params());
}

RunConfig checkpoint_config(const Checkpoint& ck) {
  if (ck.meta_at("format") != kFormat) {
    throw FormatError("checkpoint: format '" + ck.meta_at("format") + "', expected '" + kFormat + "'");
  }
  RunConfig rc;
  try {
    rc.merge_text(ck.meta_at("config"), "checkpoint config");
  } catch (const ConfigError& e) {
    throw FormatError(e.what());
  }
  return rc;
}

namespace {

void check_inputs(const Checkpoint& ck, const GlyphAtlas& atlas, const LabeledCorpus& corpus) {
  if (ck.meta_at("atlas") != atlas_signature(atlas)) {
    throw VocabError("checkpoint: atlas " + ck.meta_at("atlas") + " does not match supplied atlas " +
                      atlas_signature(atlas));
  }
  (void)corpus;
}

}  // namespace

std::unique_ptr<GlyceModel> model_from_checkpoint(const Checkpoint& ck, const GlyphAtlas& atlas,
                                                  const LabeledCorpus& corpus) {
  const RunConfig rc = checkpoint_config(ck);
  check_inputs(ck, atlas, corpus);
  auto model = std::make_unique<GlyceModel>(ModelConfig::from(rc, atlas, corpus), rc.seed());
  load_model_params(ck, *model);
  return model;
}

std::unique_ptr<Trainer> Trainer::resume(const Checkpoint& ck, const GlyphAtlas& atlas,
                                         const LabeledCorpus& corpus, const RunConfig* expected) {
  const RunConfig rc = checkpoint_config(ck);
  if (expected) {
    const auto want = expected->architecture();
    const auto have = rc.architecture();
    for (const auto& [k, v] : want) {
      const auto it = have.find(k);
      if (it == have.end() || it->second != v) {
        throw FormatError("checkpoint: architecture key '" + k + "' is " +
                          (it == have.end() ? std::string("absent") : it->second) +
                          ", config expects " + v);
      }
    }
  }
  check_inputs(ck, atlas, corpus);
  if (ck.meta_at("dataset") != corpus.fingerprint()) {
    throw FormatError("checkpoint: trained on dataset " + ck.meta_at("dataset") +
                      ", supplied corpus is " + corpus.fingerprint());
  }

  auto t = std::make_unique<Trainer>(rc, atlas, corpus);
  load_model_params(ck, *t->model_);
  t->epoch_ = parse_size(ck.meta_at("epoch"), "epoch");
  t->stage_index_ = parse_size(ck.meta_at("stage_index"), "stage_index");
  t->epoch_in_stage_ = parse_size(ck.meta_at("epoch_in_stage"), "epoch_in_stage");
  t->bad_evals_ = parse_size(ck.meta_at("bad_evals"), "bad_evals");
  t->stage_best_ = parse_exact_double(ck.meta_at("stage_best"), "checkpoint stage_best");
  t->best_primary_ = parse_exact_double(ck.meta_at("best_primary"), "checkpoint best_primary");
  const std::string& be = ck.meta_at("best_epoch");
  if (!be.empty()) t->best_epoch_ = parse_size(be, "best_epoch");
  t->finished_ = ck.meta_at("finished") == "1";
  t->rng_.set_state(ck.meta_at("rng"));
  std::istringstream hist(ck.meta_at("history"));
  for (std::string line; std::getline(hist, line);)
    if (!line.empty()) t->history_.push_back(parse_epoch_record(line));
  t->last_dev_ = parse_epoch_record(ck.meta_at("last_dev")).dev;

  if (ck.find("best/" + t->model_->params().items().front().name)) {
    ParamSet best = t->model_->params().clone();
    read_tensors(ck, "best/", best);
    t->best_ = std::move(best);
  }
  for (const auto& it : t->model_->params().items()) {
    const ad::Tensor* m = ck.find("adam.m/" + it.name);
    if (m == nullptr) continue;
    const ad::Tensor* v = ck.find("adam.v/" + it.name);
    const ad::Tensor* s = ck.find("adam.steps/" + it.name);
    if (v == nullptr || s == nullptr) {
      throw FormatError("checkpoint: incomplete optimizer state for '" + it.name + "'");
    }
    for (const auto* x : {m, v}) {
      if (x->shape != it.tensor->shape) {
        throw FormatError("checkpoint: optimizer tensor for '" + it.name + "' has shape " +
                          ad::shape_str(x->shape) + ", model expects " +
                          ad::shape_str(it.tensor->shape));
      }
    }
    Adam::Slot slot;
    slot.m = m->values;
    slot.v = v->values;
    slot.steps = static_cast<std::uint64_t>(s->values.at(0));
    t->adam_.slots()[it.name] = std::move(slot);
  }
  return t;
}

}  // namespace glyce
