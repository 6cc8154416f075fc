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

#include "core/workflow.hpp"

#include <cctype>
#include <fstream>
#include <map>

#include <json.hpp>

#include "core/error.hpp"

namespace glyce {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

nlohmann::ordered_json to_json(const DevMetrics& m) {
  nlohmann::ordered_json j;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["accuracy"] = m.accuracy;
  j["primary"] = m.primary;
  return j;
}

std::string slug(const std::string& name) {
  std::string out;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!out.empty() && out.back() != '-') {
      out += '-';
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out;
}

}  // namespace

GlyphAtlas synthetic_atlas(const RunConfig& rc) {
  return generate_synthetic_atlas(static_cast<std::uint32_t>(rc.get_size("chars")),
                                  static_cast<std::uint16_t>(rc.get_size("scripts")),
                                  static_cast<std::uint16_t>(rc.get_size("dfont")), rc.seed());
}

LabeledCorpus synthetic_corpus(const RunConfig& rc, const GlyphAtlas& atlas) {
  switch (parse_task_kind(rc.get("task"))) {
    case TaskKind::kTagging:
      return gen_tagging_corpus(atlas, rc.get_size("n_sentences"), rc.seed());
    case TaskKind::kClassification:
      return gen_classification_corpus(atlas, rc.get_size("n_docs"), rc.get_size("n_classes"),
                                       rc.seed());
    case TaskKind::kPair:
      return gen_pair_corpus(atlas, rc.get_size("n_pairs"), rc.seed());
  }
  throw ConfigError("unknown task");
}

Dataset synthetic_dataset(const RunConfig& rc) {
  GlyphAtlas atlas = synthetic_atlas(rc);
  LabeledCorpus corpus = synthetic_corpus(rc, atlas);
  return {std::move(atlas), std::move(corpus)};
}

void write_text_file(const fs::path& path, const std::string& text) { write_text(path, text); }

std::string metrics_json(const DevMetrics& m) { return to_json(m).dump(); }

std::string metrics_json(const RunOutcome& r, const std::string& dataset) {
  nlohmann::ordered_json j;
  j["dataset"] = dataset;
  j["epochs_run"] = r.history.size();
  if (r.best_epoch) {
    j["best_epoch"] = *r.best_epoch;
  } else {
    j["best_epoch"] = nullptr;
  }
  j["dev"] = to_json(r.dev);
  j["test"] = to_json(r.test);
  return j.dump(2) + "\n";
}

void write_run_dir(const fs::path& dir, const Trainer& t, const RunOutcome& r,
                   const std::string& dataset) {
  fs::create_directories(dir);
  write_text(dir / "config.txt", t.run_config().to_text());
  write_text(dir / "seed.txt", std::to_string(t.run_config().seed()) + "\n");
  std::string hist;
  for (const auto& rec : r.history) hist += to_json_line(rec) + "\n";
  write_text(dir / "history.jsonl", hist);
  write_text(dir / "metrics.json", metrics_json(r, dataset));
  save_checkpoint(t.checkpoint(), dir / "checkpoint.gckp");
}

RunOutcome train_and_record(const RunConfig& rc, const GlyphAtlas& atlas,
                            const LabeledCorpus& corpus, const fs::path& out_dir,
                            const std::function<bool(const EpochRecord&)>& progress) {
  Trainer t(rc, atlas, corpus);
  if (progress) t.on_epoch = progress;
  t.run();
  RunOutcome out;
  out.best_epoch = t.best_epoch();
  out.history = t.history();
  out.dev = t.evaluate(corpus.dev);
  if (!corpus.test.empty()) out.test = t.evaluate(corpus.test);

  if (!out_dir.empty()) write_run_dir(out_dir, t, out, corpus.fingerprint());
  return out;
}

void write_embeddings(const GlyceModel& model, const GlyphAtlas& atlas, const fs::path& path) {
  if (!model.config().use_glyph) throw ConfigError("embed: model has no glyph path (context-only)");
  write_text(path, embedding_table(model.cnn(), atlas));
}

std::string embedding_table(const TianzigeCnnParams& cnn, const GlyphAtlas& atlas) {
  std::string text =
      std::to_string(atlas.n_chars()) + " " + std::to_string(cnn.config.d_glyph) + "\n";
  for (CharId c = 0; c < atlas.n_chars(); ++c) {
    text += std::to_string(c);
    for (double v : embed(cnn, atlas.lookup(c)).values) text += " " + exact_double(v);
    text += "\n";
  }
  return text;
}

TianzigeCnnParams glyph_encoder_from_checkpoint(const Checkpoint& ck, const GlyphAtlas& atlas) {
  const RunConfig rc = checkpoint_config(ck);
  if (ck.meta_at("atlas") != atlas_signature(atlas)) {
    throw VocabError("checkpoint: atlas " + ck.meta_at("atlas") + " does not match supplied atlas " +
                     atlas_signature(atlas));
  }
  if (rc.get("strategy") == "context-only") {
    throw ConfigError("embed: checkpoint was trained without a glyph path (context-only)");
  }
  TianzigeCnnConfig c;
  c.n_scripts = atlas.n_scripts();
  c.d_font = atlas.d_font();
  c.c_conv = rc.get_size("c_conv");
  c.c_mid = rc.get_size("c_mid");
  c.d_glyph = rc.get_size("d_glyph");
  c.groups_1 = rc.get_size("groups_1");
  c.groups_2 = rc.get_size("groups_2");
  c.variant = parse_cnn_variant(rc.get("cnn"));
  TianzigeCnnParams p = init_params(c.resolved(), atlas.n_chars(), 0);
  read_tensors(ck, "param/cnn.", p.params);
  return p;
}

const std::vector<std::string>& ablation_grid_names() {
  static const std::vector<std::string> names{"strategy", "image-cls", "output-layer", "cnn"};
  return names;
}

AblationGrid ablation_grid(const std::string& key) {
  // Everything except the strategy sweep uses the staged reference model.
  const std::pair<std::string, std::string> staged{"strategy", "staged-joint"};
  if (key == "strategy") {
    return {key,
            "Impact of different training strategy",
            "only context",
            {{"context-glyce-joint", {staged}},
             {"Glyph-Joint", {{"strategy", "glyph-joint"}}},
             {"joint", {{"strategy", "joint"}}},
             {"only context", {{"strategy", "context-only"}}}}};
  }
  if (key == "image-cls") {
    return {key,
            "Impact of the auxiliary image-classification objective",
            "WO image-cls",
            {{"W image-cls", {staged}}, {"WO image-cls", {staged, {"lambda0", "0"}}}}};
  }
  if (key == "output-layer") {
    return {key,
            "Impact of structures for the task-specific output layer",
            "Transformers",
            {{"Transformers", {staged, {"task_layer", "transformer"}}},
             {"BiLSTMs", {staged, {"task_layer", "bilstm"}}},
             {"CNNs", {staged, {"task_layer", "cnn"}}},
             {"No task layer", {staged, {"task_layer", "none"}}}}};
  }
  if (key == "cnn") {
    return {key,
            "Impact of CNN structures",
            "Vanilla-CNN",
            {{"Vanilla-CNN", {staged, {"cnn", "vanilla"}}},
             {"Deep-residual", {staged, {"cnn", "deep-residual"}}},
             {"Tianzige-CNN", {staged, {"cnn", "tianzige"}}}}};
  }
  throw ConfigError("unknown ablation grid '" + key + "' (strategy|image-cls|output-layer|cnn|all)");
}

std::vector<AblationReport> run_ablation(
    const std::vector<AblationGrid>& grids, const RunConfig& base, const GlyphAtlas& atlas,
    const LabeledCorpus& corpus, const fs::path& out_dir,
    const std::function<void(const AblationProgress&)>& on_row,
    const std::function<void(const EpochRecord&)>& on_epoch) {
  std::map<std::string, RunSummary> done;  // keyed by resolved config text
  std::vector<AblationReport> reports;
  for (const auto& grid : grids) {
    std::vector<RunSummary> runs;
    for (const auto& row : grid.rows) {
      RunConfig rc = base;
      for (const auto& [k, v] : row.overrides) rc.set(k, v);
      const std::string key = rc.to_text();
      auto it = done.find(key);
      if (on_row) on_row({grid.key, row.name, it != done.end()});
      if (it == done.end()) {
        const fs::path dir = out_dir.empty() ? fs::path() : out_dir / grid.key / slug(row.name);
        std::function<bool(const EpochRecord&)> cb;
        if (on_epoch) cb = [&](const EpochRecord& e) {
          on_epoch(e);
          return true;
        };
        RunOutcome r = train_and_record(rc, atlas, corpus, dir, cb);
        RunSummary s;
        s.dataset = corpus.fingerprint();
        s.config = rc.values();
        s.history = std::move(r.history);
        it = done.emplace(key, std::move(s)).first;
      }
      RunSummary s = it->second;
      s.name = row.name;
      runs.push_back(std::move(s));
    }
    reports.push_back(ablation_report(grid.title, runs, grid.baseline));
  }
  return reports;
}

}  // namespace glyce
