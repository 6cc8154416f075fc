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

#include "glyce/glyce.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include <json.hpp>

#include "core/error.hpp"
#include "core/workflow.hpp"

struct glyce_config {
  glyce::RunConfig rc;
};
struct glyce_atlas {
  glyce::GlyphAtlas atlas;
};
struct glyce_corpus {
  glyce::LabeledCorpus corpus;
};

namespace {

thread_local std::string g_last_error;

glyce_status status_of(glyce::ErrorKind k) {
  using K = glyce::ErrorKind;
  switch (k) {
    case K::kConfig: return GLYCE_ERR_CONFIG;
    case K::kIo: return GLYCE_ERR_IO;
    case K::kFormat: return GLYCE_ERR_FORMAT;
    case K::kVocab: return GLYCE_ERR_VOCAB;
    case K::kShape: return GLYCE_ERR_SHAPE;
    case K::kIndex: return GLYCE_ERR_INDEX;
    case K::kNumeric: return GLYCE_ERR_NUMERIC;
    case K::kContract: return GLYCE_ERR_CONTRACT;
    case K::kInput: return GLYCE_ERR_INPUT;
  }
  return GLYCE_ERR_INTERNAL;
}

glyce_status fail(glyce_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
glyce_status guarded(F&& f) {
  try {
    f();
    return GLYCE_OK;
  } catch (const glyce::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(GLYCE_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(GLYCE_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(GLYCE_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(GLYCE_ERR_INTERNAL, "unknown failure");
  }
}

void need(const void* p, const char* what) {
  if (!p) throw glyce::ContractError(std::string(what) + " is NULL");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void give(char** out, const std::string& s) {
  if (out) *out = dup(s);
}

std::string opt_path(const char* p) { return p ? std::string(p) : std::string(); }

const std::vector<std::size_t>& split_of(const glyce::LabeledCorpus& k, const std::string& s) {
  if (s == "train") return k.train;
  if (s == "dev") return k.dev;
  if (s == "test") return k.test;
  throw glyce::ConfigError("unknown split '" + s + "' (train|dev|test)");
}

}  // namespace

extern "C" {

const char* glyce_status_name(glyce_status s) {
  switch (s) {
    case GLYCE_OK: return "ok";
    case GLYCE_ERR_CONFIG: return "config";
    case GLYCE_ERR_IO: return "io";
    case GLYCE_ERR_FORMAT: return "format";
    case GLYCE_ERR_VOCAB: return "vocab";
    case GLYCE_ERR_SHAPE: return "shape";
    case GLYCE_ERR_INDEX: return "index";
    case GLYCE_ERR_NUMERIC: return "numeric";
    case GLYCE_ERR_CONTRACT: return "contract";
    case GLYCE_ERR_INPUT: return "input";
    case GLYCE_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* glyce_last_error(void) { return g_last_error.c_str(); }

void glyce_string_free(char* s) { std::free(s); }

const char* glyce_version(void) { return "0.1.0"; }

// ---- config ----

glyce_status glyce_config_new(glyce_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new glyce_config();
  });
}

glyce_status glyce_config_clone(const glyce_config* c, glyce_config** out) {
  return guarded([&] {
    need(c, "config");
    need(out, "out");
    *out = new glyce_config(*c);
  });
}

void glyce_config_free(glyce_config* c) { delete c; }

glyce_status glyce_config_set(glyce_config* c, const char* key, const char* value) {
  return guarded([&] {
    need(c, "config");
    need(key, "key");
    need(value, "value");
    c->rc.set(key, value);
  });
}

glyce_status glyce_config_merge_file(glyce_config* c, const char* path) {
  return guarded([&] {
    need(c, "config");
    need(path, "path");
    c->rc.merge_file(path);
  });
}

glyce_status glyce_config_get(const glyce_config* c, const char* key, char** value) {
  return guarded([&] {
    need(c, "config");
    need(key, "key");
    need(value, "value");
    *value = dup(c->rc.get(key));
  });
}

glyce_status glyce_config_to_text(const glyce_config* c, char** text) {
  return guarded([&] {
    need(c, "config");
    need(text, "text");
    *text = dup(c->rc.to_text());
  });
}

size_t glyce_config_key_count(void) { return glyce::RunConfig::keys().size(); }

glyce_status glyce_config_key_info(size_t i, const char** name, const char** default_value,
                                   const char** help) {
  return guarded([&] {
    const auto& keys = glyce::RunConfig::keys();
    if (i >= keys.size()) throw glyce::IndexError("config key index " + std::to_string(i));
    if (name) *name = keys[i].name;
    if (default_value) *default_value = keys[i].default_value;
    if (help) *help = keys[i].help;
  });
}

// ---- atlas ----

glyce_status glyce_atlas_generate(const glyce_config* c, glyce_atlas** out) {
  return guarded([&] {
    need(c, "config");
    need(out, "out");
    *out = new glyce_atlas{glyce::synthetic_atlas(c->rc)};
  });
}

glyce_status glyce_atlas_load(const char* path, glyce_atlas** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new glyce_atlas{glyce::load_atlas(path)};
  });
}

glyce_status glyce_atlas_save(const glyce_atlas* a, const char* path) {
  return guarded([&] {
    need(a, "atlas");
    need(path, "path");
    glyce::save_atlas(a->atlas, path);
  });
}

void glyce_atlas_free(glyce_atlas* a) { delete a; }

glyce_status glyce_atlas_info(const glyce_atlas* a, uint32_t* n_chars, uint32_t* n_scripts,
                              uint32_t* d_font) {
  return guarded([&] {
    need(a, "atlas");
    if (n_chars) *n_chars = a->atlas.n_chars();
    if (n_scripts) *n_scripts = a->atlas.n_scripts();
    if (d_font) *d_font = a->atlas.d_font();
  });
}

glyce_status glyce_atlas_glyph(const glyce_atlas* a, uint32_t char_id, double* out,
                               size_t out_len) {
  return guarded([&] {
    need(a, "atlas");
    need(out, "out");
    const auto t = a->atlas.lookup(char_id);
    if (out_len < t.values.size()) {
      throw glyce::ContractError("glyph buffer holds " + std::to_string(out_len) + " values, needs " +
                                 std::to_string(t.values.size()));
    }
    std::memcpy(out, t.values.data(), t.values.size() * sizeof(double));
  });
}

// ---- corpus ----

glyce_status glyce_corpus_generate(const glyce_config* c, const glyce_atlas* a,
                                   glyce_corpus** out) {
  return guarded([&] {
    need(c, "config");
    need(a, "atlas");
    need(out, "out");
    *out = new glyce_corpus{glyce::synthetic_corpus(c->rc, a->atlas)};
  });
}

glyce_status glyce_corpus_load(const char* dir, glyce_corpus** out) {
  return guarded([&] {
    need(dir, "dir");
    need(out, "out");
    *out = new glyce_corpus{glyce::load_corpus(dir)};
  });
}

glyce_status glyce_corpus_save(const glyce_corpus* k, const char* dir) {
  return guarded([&] {
    need(k, "corpus");
    need(dir, "dir");
    glyce::save_corpus(k->corpus, dir);
  });
}

void glyce_corpus_free(glyce_corpus* k) { delete k; }

glyce_status glyce_corpus_info(const glyce_corpus* k, char** json) {
  return guarded([&] {
    need(k, "corpus");
    need(json, "json");
    const auto& c = k->corpus;
    nlohmann::ordered_json j;
    j["task"] = glyce::to_string(c.task);
    j["examples"] = c.examples.size();
    j["train"] = c.train.size();
    j["dev"] = c.dev.size();
    j["test"] = c.test.size();
    j["labels"] = c.label_names;
    j["fingerprint"] = c.fingerprint();
    *json = dup(j.dump());
  });
}

glyce_status glyce_corpus_check_atlas(const glyce_corpus* k, const glyce_atlas* a) {
  return guarded([&] {
    need(k, "corpus");
    need(a, "atlas");
    k->corpus.require_covered_by(a->atlas);
  });
}

// ---- training and evaluation ----

glyce_status glyce_train(const glyce_config* c, const glyce_atlas* a, const glyce_corpus* k,
                         const char* out_dir, glyce_epoch_fn on_epoch, void* user,
                         char** metrics_json) {
  return guarded([&] {
    need(c, "config");
    need(a, "atlas");
    need(k, "corpus");
    k->corpus.require_covered_by(a->atlas);
    std::function<bool(const glyce::EpochRecord&)> cb;
    if (on_epoch) {
      cb = [&](const glyce::EpochRecord& r) {
        return on_epoch(glyce::to_json_line(r).c_str(), user) != 0;
      };
    }
    const std::string fp = k->corpus.fingerprint();
    const auto r = glyce::train_and_record(c->rc, a->atlas, k->corpus, opt_path(out_dir), cb);
    give(metrics_json, glyce::metrics_json(r, fp));
  });
}

glyce_status glyce_eval(const char* checkpoint_path, const glyce_atlas* a,
                        const glyce_corpus* k, const char* split, char** metrics_json) {
  return guarded([&] {
    need(checkpoint_path, "checkpoint_path");
    need(a, "atlas");
    need(k, "corpus");
    need(split, "split");
    need(metrics_json, "metrics_json");
    const auto& rows = split_of(k->corpus, split);
    k->corpus.require_covered_by(a->atlas);
    const auto ck = glyce::load_checkpoint(checkpoint_path);
    const auto model = glyce::model_from_checkpoint(ck, a->atlas, k->corpus);
    const std::size_t bs = glyce::checkpoint_config(ck).get_size("batch_size");
    *metrics_json = dup(glyce::metrics_json(glyce::evaluate_model(*model, a->atlas, k->corpus, rows, bs)));
  });
}

glyce_status glyce_embed(const char* checkpoint_path, const glyce_atlas* a, const char* out_path) {
  return guarded([&] {
    need(checkpoint_path, "checkpoint_path");
    need(a, "atlas");
    need(out_path, "out_path");
    const auto cnn =
        glyce::glyph_encoder_from_checkpoint(glyce::load_checkpoint(checkpoint_path), a->atlas);
    glyce::write_text_file(out_path, glyce::embedding_table(cnn, a->atlas));
  });
}

// ---- ablations ----

size_t glyce_ablation_grid_count(void) { return glyce::ablation_grid_names().size(); }

const char* glyce_ablation_grid_name(size_t i) {
  const auto& names = glyce::ablation_grid_names();
  return i < names.size() ? names[i].c_str() : nullptr;
}

glyce_status glyce_ablate(const glyce_config* base, const glyce_atlas* a, const glyce_corpus* k,
                          const char* grid, const char* out_dir, glyce_row_fn on_row,
                          glyce_epoch_fn on_epoch, void* user, char** report_text,
                          char** report_jsonl) {
  return guarded([&] {
    need(base, "config");
    need(a, "atlas");
    need(k, "corpus");
    need(grid, "grid");
    k->corpus.require_covered_by(a->atlas);
    std::vector<glyce::AblationGrid> grids;
    if (std::string(grid) == "all") {
      for (const auto& n : glyce::ablation_grid_names()) grids.push_back(glyce::ablation_grid(n));
    } else {
      grids.push_back(glyce::ablation_grid(grid));
    }
    std::function<void(const glyce::AblationProgress&)> row_cb;
    if (on_row) {
      row_cb = [&](const glyce::AblationProgress& p) {
        const std::string line = p.grid + "\t" + p.row + "\t" + (p.reused ? "1" : "0");
        on_row(line.c_str(), user);
      };
    }
    std::function<void(const glyce::EpochRecord&)> epoch_cb;
    if (on_epoch) {
      epoch_cb = [&](const glyce::EpochRecord& r) {
        on_epoch(glyce::to_json_line(r).c_str(), user);
      };
    }
    const auto reports =
        glyce::run_ablation(grids, base->rc, a->atlas, k->corpus, opt_path(out_dir), row_cb, epoch_cb);
    std::string text, jsonl;
    for (const auto& r : reports) {
      text += glyce::to_text(r) + "\n";
      jsonl += glyce::to_json_lines(r);
    }
    text += glyce::kAblationCaveat;
    text += "\n";
    give(report_text, text);
    give(report_jsonl, jsonl);
  });
}

}  // extern "C"
