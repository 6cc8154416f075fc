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

// glyce: command-line front end over the C library.
//
// Exit codes: 0 success, 1..10 the library status (config, io, format,
// vocab, shape, index, numeric, contract, input, internal), 64 bad usage.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glyce/glyce.h"

namespace {

constexpr int kUsageExit = 64;

struct Failure {
  glyce_status status;
  std::string message;
};

void check(glyce_status s) {
  if (s != GLYCE_OK) throw Failure{s, glyce_last_error()};
}

struct ConfigFree {
  void operator()(glyce_config* c) const { glyce_config_free(c); }
};
struct AtlasFree {
  void operator()(glyce_atlas* a) const { glyce_atlas_free(a); }
};
struct CorpusFree {
  void operator()(glyce_corpus* k) const { glyce_corpus_free(k); }
};
using ConfigPtr = std::unique_ptr<glyce_config, ConfigFree>;
using AtlasPtr = std::unique_ptr<glyce_atlas, AtlasFree>;
using CorpusPtr = std::unique_ptr<glyce_corpus, CorpusFree>;

std::string take(char* s) {
  std::string out = s ? s : "";
  glyce_string_free(s);
  return out;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Failure{GLYCE_ERR_IO, "cannot write " + p.string()};
}

/// Flags shared by every command: a config file, repeated key=value
/// overrides, and one flag per config key.
struct ConfigFlags {
  std::string file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> keys;

  void attach(CLI::App* cmd, const std::vector<std::string>& shown) {
    cmd->add_option("--config", file, "key=value config file")->check(CLI::ExistingFile);
    cmd->add_option("--set", sets, "override, key=value (repeatable)");
    for (std::size_t i = 0; i < glyce_config_key_count(); ++i) {
      const char *name = nullptr, *def = nullptr, *help = nullptr;
      glyce_config_key_info(i, &name, &def, &help);
      std::string flag = std::string("--") + name;
      std::string dashed = flag;
      for (auto& ch : dashed) ch = ch == '_' ? '-' : ch;
      if (dashed != flag) flag += "," + dashed;
      auto* opt = cmd->add_option(flag, keys[name], std::string(help) + " [" + def + "]");
      opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
      bool visible = shown.empty();
      for (const auto& s : shown) visible = visible || s == name;
      if (!visible) opt->group("Config keys");
    }
  }

  /// defaults, then GLYCE_SEED, then the file, then --set, then key flags.
  ConfigPtr resolve(const CLI::App* cmd) const {
    glyce_config* raw = nullptr;
    check(glyce_config_new(&raw));
    ConfigPtr c(raw);
    if (const char* env = std::getenv("GLYCE_SEED"); env && *env) {
      const glyce_status s = glyce_config_set(c.get(), "seed", env);
      if (s != GLYCE_OK) throw Failure{s, std::string("GLYCE_SEED: ") + glyce_last_error()};
    }
    if (!file.empty()) check(glyce_config_merge_file(c.get(), file.c_str()));
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Failure{GLYCE_ERR_CONFIG, "--set expects key=value, got '" + kv + "'"};
      check(glyce_config_set(c.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
    }
    for (const auto& [k, v] : keys) {
      if (cmd->count("--" + k) > 0) check(glyce_config_set(c.get(), k.c_str(), v.c_str()));
    }
    return c;
  }
};

AtlasPtr load_atlas(const std::string& path) {
  glyce_atlas* a = nullptr;
  check(glyce_atlas_load(path.c_str(), &a));
  return AtlasPtr(a);
}

CorpusPtr load_corpus(const std::string& dir) {
  glyce_corpus* k = nullptr;
  check(glyce_corpus_load(dir.c_str(), &k));
  return CorpusPtr(k);
}

/// Loads --atlas/--corpus, or builds the synthetic pair from the config when
/// both are omitted.
std::pair<AtlasPtr, CorpusPtr> data_for(const glyce_config* c, const std::string& atlas_path,
                                        const std::string& corpus_dir) {
  if (atlas_path.empty() != corpus_dir.empty()) {
    throw Failure{GLYCE_ERR_CONFIG, "--atlas and --corpus go together (or omit both)"};
  }
  if (!atlas_path.empty()) return {load_atlas(atlas_path), load_corpus(corpus_dir)};
  glyce_atlas* a = nullptr;
  check(glyce_atlas_generate(c, &a));
  AtlasPtr atlas(a);
  glyce_corpus* k = nullptr;
  check(glyce_corpus_generate(c, atlas.get(), &k));
  return {std::move(atlas), CorpusPtr(k)};
}

int print_epoch(const char* line, void* user) {
  if (!*static_cast<bool*>(user)) std::fprintf(stderr, "%s\n", line);
  return 1;
}

void print_row(const char* line, void* user) {
  if (*static_cast<bool*>(user)) return;
  std::string s(line);
  const auto t1 = s.find('\t');
  const auto t2 = s.find('\t', t1 + 1);
  std::fprintf(stderr, "[%s] %s%s\n", s.substr(0, t1).c_str(), s.substr(t1 + 1, t2 - t1 - 1).c_str(),
               s.substr(t2 + 1) == "1" ? " (same config as an earlier row, reused)" : "");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Glyph-augmented character models on synthetic data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", glyce_version());
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "no progress on stderr");

  ConfigFlags f_atlas, f_corpus, f_train, f_eval, f_embed, f_ablate, f_config;

  auto* gen_atlas = app.add_subcommand("gen-atlas", "render a synthetic glyph atlas (.gatl)");
  std::string atlas_out;
  gen_atlas->add_option("-o,--out", atlas_out, "output file")->required();
  f_atlas.attach(gen_atlas, {"chars", "scripts", "dfont", "seed"});

  auto* gen_corpus = app.add_subcommand("gen-corpus", "generate a labeled corpus directory");
  std::string corpus_atlas, corpus_out;
  gen_corpus->add_option("--atlas", corpus_atlas, "atlas file")->required();
  gen_corpus->add_option("-o,--out", corpus_out, "output directory")->required();
  f_corpus.attach(gen_corpus,
                  {"task", "n_sentences", "n_docs", "n_pairs", "n_classes", "seed"});

  auto* train = app.add_subcommand("train", "train a model and write a run directory");
  std::string train_atlas, train_corpus, train_out;
  train->add_option("--atlas", train_atlas, "atlas file (omit with --corpus to synthesize)");
  train->add_option("--corpus", train_corpus, "corpus directory");
  train->add_option("-o,--out", train_out, "run directory")->required();
  f_train.attach(train, {"task", "strategy", "lambda0", "lambda1", "lr", "epochs_a", "epochs_b",
                         "epochs_c", "seed"});

  auto* eval = app.add_subcommand("eval", "score a split with a checkpoint");
  std::string eval_ckpt, eval_atlas, eval_corpus, eval_split = "dev", eval_out;
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval->add_option("--atlas", eval_atlas, "atlas file")->required();
  eval->add_option("--corpus", eval_corpus, "corpus directory")->required();
  eval->add_option("--split", eval_split, "train | dev | test")->capture_default_str();
  eval->add_option("-o,--out", eval_out, "also write the metrics record here");

  auto* embed = app.add_subcommand("embed", "export the per-character glyph embedding table");
  std::string embed_ckpt, embed_atlas, embed_out;
  embed->add_option("--checkpoint", embed_ckpt, "checkpoint file")->required();
  embed->add_option("--atlas", embed_atlas, "atlas file")->required();
  embed->add_option("-o,--out", embed_out, "output table")->required();

  auto* ablate = app.add_subcommand("ablate", "run an ablation grid and print the report");
  std::string grid, ablate_atlas, ablate_corpus, ablate_out;
  ablate->add_option("--grid", grid, "strategy | image-cls | output-layer | cnn | all")->required();
  ablate->add_option("--atlas", ablate_atlas, "atlas file (omit with --corpus to synthesize)");
  ablate->add_option("--corpus", ablate_corpus, "corpus directory");
  ablate->add_option("-o,--out", ablate_out, "directory for row runs and the report files");
  f_ablate.attach(ablate, {"task", "epochs_a", "epochs_b", "epochs_c", "patience", "seed"});

  auto* show = app.add_subcommand("config", "print the fully resolved config");
  f_config.attach(show, {"seed"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "glyce: error[usage]: %s\n", e.what());
    return kUsageExit;
  }

  try {
    if (gen_atlas->parsed()) {
      auto c = f_atlas.resolve(gen_atlas);
      glyce_atlas* a = nullptr;
      check(glyce_atlas_generate(c.get(), &a));
      AtlasPtr atlas(a);
      check(glyce_atlas_save(atlas.get(), atlas_out.c_str()));
    } else if (gen_corpus->parsed()) {
      auto c = f_corpus.resolve(gen_corpus);
      auto atlas = load_atlas(corpus_atlas);
      glyce_corpus* k = nullptr;
      check(glyce_corpus_generate(c.get(), atlas.get(), &k));
      CorpusPtr corpus(k);
      check(glyce_corpus_save(corpus.get(), corpus_out.c_str()));
    } else if (train->parsed()) {
      auto c = f_train.resolve(train);
      auto [atlas, corpus] = data_for(c.get(), train_atlas, train_corpus);
      check(glyce_corpus_check_atlas(corpus.get(), atlas.get()));
      char* metrics = nullptr;
      check(glyce_train(c.get(), atlas.get(), corpus.get(), train_out.c_str(), print_epoch, &quiet,
                        &metrics));
      std::cout << take(metrics);
    } else if (eval->parsed()) {
      auto atlas = load_atlas(eval_atlas);
      auto corpus = load_corpus(eval_corpus);
      char* metrics = nullptr;
      check(glyce_eval(eval_ckpt.c_str(), atlas.get(), corpus.get(), eval_split.c_str(), &metrics));
      const std::string m = take(metrics) + "\n";
      if (!eval_out.empty()) write_file(eval_out, m);
      std::cout << m;
    } else if (embed->parsed()) {
      auto atlas = load_atlas(embed_atlas);
      check(glyce_embed(embed_ckpt.c_str(), atlas.get(), embed_out.c_str()));
    } else if (ablate->parsed()) {
      auto c = f_ablate.resolve(ablate);
      auto [atlas, corpus] = data_for(c.get(), ablate_atlas, ablate_corpus);
      check(glyce_corpus_check_atlas(corpus.get(), atlas.get()));
      char *text = nullptr, *jsonl = nullptr;
      check(glyce_ablate(c.get(), atlas.get(), corpus.get(), grid.c_str(), ablate_out.c_str(),
                         print_row, nullptr, &quiet, &text, &jsonl));
      const std::string t = take(text), j = take(jsonl);
      if (!ablate_out.empty()) {
        std::filesystem::create_directories(ablate_out);
        write_file(std::filesystem::path(ablate_out) / "report.txt", t);
        write_file(std::filesystem::path(ablate_out) / "report.jsonl", j);
      }
      std::cout << t;
    } else if (show->parsed()) {
      auto c = f_config.resolve(show);
      char* text = nullptr;
      check(glyce_config_to_text(c.get(), &text));
      std::cout << take(text);
    }
  } catch (const Failure& e) {
    std::fprintf(stderr, "glyce: error[%s]: %s\n", glyce_status_name(e.status), e.message.c_str());
    return static_cast<int>(e.status);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "glyce: error[internal]: %s\n", e.what());
    return static_cast<int>(GLYCE_ERR_INTERNAL);
  }
  return 0;
}
