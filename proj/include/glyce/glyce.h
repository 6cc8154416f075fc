/* Copyright 2026 The Glyce Desk Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the glyph-augmented character model library.
 *
 * Every call returns a glyce_status. On failure glyce_last_error() holds a
 * one-line message for the calling thread until its next failing call.
 * Strings handed out through char** must be released with glyce_string_free.
 * Handles are opaque and owned by the caller.
 */

#ifndef GLYCE_GLYCE_H_
#define GLYCE_GLYCE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GLYCE_API __declspec(dllexport)
#else
#define GLYCE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum glyce_status {
  GLYCE_OK = 0,
  GLYCE_ERR_CONFIG = 1,   /* unknown key, bad value, inconsistent settings */
  GLYCE_ERR_IO = 2,       /* missing or unreadable file */
  GLYCE_ERR_FORMAT = 3,   /* malformed atlas, corpus or checkpoint */
  GLYCE_ERR_VOCAB = 4,    /* atlas does not cover or match the data */
  GLYCE_ERR_SHAPE = 5,
  GLYCE_ERR_INDEX = 6,
  GLYCE_ERR_NUMERIC = 7,  /* training diverged */
  GLYCE_ERR_CONTRACT = 8, /* precondition violated by the caller */
  GLYCE_ERR_INPUT = 9,    /* malformed text input */
  GLYCE_ERR_INTERNAL = 10
} glyce_status;

/* Short lowercase category name, e.g. "config". Never NULL. */
GLYCE_API const char* glyce_status_name(glyce_status s);
/* Message of the calling thread's last failure; "" if none. */
GLYCE_API const char* glyce_last_error(void);
GLYCE_API void glyce_string_free(char* s);
GLYCE_API const char* glyce_version(void);

/* ---- run configuration ---- */

typedef struct glyce_config glyce_config;

/* A config holding every default. */
GLYCE_API glyce_status glyce_config_new(glyce_config** out);
GLYCE_API glyce_status glyce_config_clone(const glyce_config* c, glyce_config** out);
GLYCE_API void glyce_config_free(glyce_config* c);
GLYCE_API glyce_status glyce_config_set(glyce_config* c, const char* key, const char* value);
/* key=value lines; '#' comments and blank lines are skipped. */
GLYCE_API glyce_status glyce_config_merge_file(glyce_config* c, const char* path);
GLYCE_API glyce_status glyce_config_get(const glyce_config* c, const char* key, char** value);
/* The fully resolved config as sorted key=value lines. */
GLYCE_API glyce_status glyce_config_to_text(const glyce_config* c, char** text);

/* Recognized keys in display order; returns GLYCE_ERR_INDEX past the end. */
GLYCE_API size_t glyce_config_key_count(void);
GLYCE_API glyce_status glyce_config_key_info(size_t i, const char** name,
                                             const char** default_value, const char** help);

/* ---- glyph atlas ---- */

typedef struct glyce_atlas glyce_atlas;

/* Uses the config keys chars, scripts, dfont and seed. */
GLYCE_API glyce_status glyce_atlas_generate(const glyce_config* c, glyce_atlas** out);
GLYCE_API glyce_status glyce_atlas_load(const char* path, glyce_atlas** out);
GLYCE_API glyce_status glyce_atlas_save(const glyce_atlas* a, const char* path);
GLYCE_API void glyce_atlas_free(glyce_atlas* a);
GLYCE_API glyce_status glyce_atlas_info(const glyce_atlas* a, uint32_t* n_chars,
                                        uint32_t* n_scripts, uint32_t* d_font);
/* Copies the [n_scripts, d_font, d_font] bitmap of one character, values in
 * [0, 1], into out[0 .. n_scripts * d_font * d_font). */
GLYCE_API glyce_status glyce_atlas_glyph(const glyce_atlas* a, uint32_t char_id, double* out,
                                         size_t out_len);

/* ---- labeled corpus ---- */

typedef struct glyce_corpus glyce_corpus;

/* Builds the corpus of the config's task over the atlas, from the seed. */
GLYCE_API glyce_status glyce_corpus_generate(const glyce_config* c, const glyce_atlas* a,
                                             glyce_corpus** out);
GLYCE_API glyce_status glyce_corpus_load(const char* dir, glyce_corpus** out);
GLYCE_API glyce_status glyce_corpus_save(const glyce_corpus* k, const char* dir);
GLYCE_API void glyce_corpus_free(glyce_corpus* k);
/* JSON object: task, examples, train, dev, test, labels, fingerprint. */
GLYCE_API glyce_status glyce_corpus_info(const glyce_corpus* k, char** json);
/* VocabError-style check: GLYCE_ERR_VOCAB names the first uncovered id. */
GLYCE_API glyce_status glyce_corpus_check_atlas(const glyce_corpus* k, const glyce_atlas* a);

/* ---- training ---- */

/* Receives each epoch record as one JSON line. Return nonzero to continue,
 * zero to stop early (the best dev snapshot is still restored). */
typedef int (*glyce_epoch_fn)(const char* record_json, void* user);

/* Trains to completion. When out_dir is non-NULL and non-empty a run
 * directory (config.txt, seed.txt, history.jsonl, metrics.json,
 * checkpoint.gckp) is written there. metrics_json may be NULL. */
GLYCE_API glyce_status glyce_train(const glyce_config* c, const glyce_atlas* a,
                                   const glyce_corpus* k, const char* out_dir,
                                   glyce_epoch_fn on_epoch, void* user, char** metrics_json);

/* Scores a split ("train", "dev" or "test") with a saved checkpoint. The
 * result is a JSON object with precision, recall, f1, accuracy, primary. */
GLYCE_API glyce_status glyce_eval(const char* checkpoint_path, const glyce_atlas* a,
                                  const glyce_corpus* k, const char* split, char** metrics_json);

/* Writes the per-character glyph embedding table of a checkpoint:
 * "<n_chars> <d_glyph>" then "<char_id> v_1 ... v_d" per line. */
GLYCE_API glyce_status glyce_embed(const char* checkpoint_path, const glyce_atlas* a,
                                   const char* out_path);

/* ---- ablations ---- */

/* Number of grids and their keys: strategy, image-cls, output-layer, cnn. */
GLYCE_API size_t glyce_ablation_grid_count(void);
GLYCE_API const char* glyce_ablation_grid_name(size_t i);

/* Receives "<grid>\t<row>\t<reused 0|1>" before each row. */
typedef void (*glyce_row_fn)(const char* line, void* user);

/* Runs one grid, or every grid when grid is "all", against the base config.
 * report_text receives the fixed-width tables, report_jsonl one JSON object
 * per row (either may be NULL). Row run directories go under out_dir when it
 * is non-NULL and non-empty. */
GLYCE_API glyce_status glyce_ablate(const glyce_config* base, const glyce_atlas* a,
                                    const glyce_corpus* k, const char* grid, const char* out_dir,
                                    glyce_row_fn on_row, glyce_epoch_fn on_epoch, void* user,
                                    char** report_text, char** report_jsonl);

#ifdef __cplusplus
}
#endif

#endif /* GLYCE_GLYCE_H_ */
