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

#include "core/run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace glyce {

namespace {

using K = RunConfig::Key;

const K* find_key(const std::string& name) {
  for (const auto& k : RunConfig::keys())
    if (name == k.name) return &k;
  return nullptr;
}

bool parses_as_int(const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  return !v.empty() && ec == std::errc() && p == v.data() + v.size();
}

bool parses_as_real(const std::string& v, double* out = nullptr) {
  if (v.empty()) return false;
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || !std::isfinite(d)) return false;
  if (out) *out = d;
  return true;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

const std::vector<RunConfig::Key>& RunConfig::keys() {
  static const std::vector<Key> table = {
      {"seed", "1", K::kInt, false, "base seed for every random draw"},
      {"task", "tagging", K::kText, true, "tagging | classification | pair"},
      {"strategy", "joint", K::kText, true, "staged-joint | glyph-joint | joint | context-only"},
      {"epochs_a", "20", K::kInt, false, "stage A epochs (context + task, glyph frozen)"},
      {"epochs_b", "20", K::kInt, false, "stage B epochs (glyph + task, context frozen)"},
      {"epochs_c", "60", K::kInt, false, "stage C epochs (everything)"},
      {"lr", "0.001", K::kReal, false, "adaptive-moment learning rate"},
      {"batch_size", "16", K::kInt, false, "examples per update"},
      {"lambda0", "0.1", K::kReal, false, "initial weight of the glyph classification loss"},
      {"lambda1", "0.8", K::kReal, false, "per-epoch decay of that weight"},
      {"patience", "10", K::kInt, false, "dev evaluations without improvement before a stage ends"},
      {"eval_every", "1", K::kInt, false, "epochs between dev evaluations"},
      {"d_ctx", "64", K::kInt, true, "context encoder width"},
      {"ctx_layers", "2", K::kInt, true, "context encoder layers"},
      {"ctx_heads", "4", K::kInt, true, "context encoder attention heads"},
      {"max_len", "64", K::kInt, true, "longest packed token sequence"},
      {"ffn_mult", "2", K::kInt, true, "feed-forward width multiplier"},
      {"c_conv", "64", K::kInt, true, "glyph CNN first conv channels"},
      {"c_mid", "16", K::kInt, true, "glyph CNN channels after the first group conv"},
      {"d_glyph", "64", K::kInt, true, "glyph embedding width"},
      {"groups_1", "8", K::kInt, true, "groups of the first group conv"},
      {"groups_2", "16", K::kInt, true, "groups of the second group conv"},
      {"cnn", "tianzige", K::kText, true, "tianzige | vanilla | deep-residual"},
      {"task_layer", "transformer", K::kText, true, "transformer | bilstm | cnn | none"},
      {"task_layers", "2", K::kInt, true, "task-specific layers"},
      {"task_heads", "4", K::kInt, true, "task transformer attention heads"},
      {"chars", "100", K::kInt, false, "synthetic atlas characters"},
      {"scripts", "2", K::kInt, false, "synthetic atlas scripts"},
      {"dfont", "12", K::kInt, false, "synthetic atlas bitmap side"},
      {"n_sentences", "2000", K::kInt, false, "tagging corpus size"},
      {"n_docs", "1000", K::kInt, false, "classification corpus size"},
      {"n_pairs", "1000", K::kInt, false, "pair corpus size"},
      {"n_classes", "4", K::kInt, false, "classification corpus classes"},
  };
  return table;
}

RunConfig::RunConfig() {
  for (const auto& k : keys()) values_[k.name] = k.default_value;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const K* k = find_key(key);
  if (k == nullptr) throw ConfigError("unknown config key '" + key + "'");
  if (k->type == K::kInt && !parses_as_int(value)) {
    throw ConfigError("config key '" + key + "' needs a non-negative integer, got '" + value + "'");
  }
  if (k->type == K::kReal && !parses_as_real(value)) {
    throw ConfigError("config key '" + key + "' needs a finite number, got '" + value + "'");
  }
  if (k->type == K::kText && value.empty()) {
    throw ConfigError("config key '" + key + "' needs a value");
  }
  values_[key] = value;
}

void RunConfig::merge_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  for (std::size_t ln = 1; std::getline(in, line); ++ln) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(ln) + ": expected key=value, got '" + line +
                        "'");
    }
    try {
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(ln) + ": " + e.what());
    }
  }
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  merge_text(ss.str(), path.string());
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

std::size_t RunConfig::get_size(const std::string& key) const {
  return static_cast<std::size_t>(std::stoull(get(key)));
}

double RunConfig::get_real(const std::string& key) const {
  double d = 0.0;
  parses_as_real(get(key), &d);
  return d;
}

std::map<std::string, std::string> RunConfig::architecture() const {
  std::map<std::string, std::string> out;
  for (const auto& k : keys())
    if (k.architecture) out[k.name] = values_.at(k.name);
  // context-only drops the glyph path, which changes the parameter set.
  out["glyph_path"] = values_.at("strategy") == "context-only" ? "off" : "on";
  out.erase("strategy");
  return out;
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

}  // namespace glyce
