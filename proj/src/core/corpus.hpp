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

// Labeled corpora over atlas character ids, and generators whose labels are
// functions of the characters' stroke-motif families.
//
// Directory layout:
//   meta.txt                key=value lines
//   train.tsv dev.tsv test.tsv
// Row formats (ids space separated):
//   tagging         "c c c<TAB>B M E"
//   classification  "c c c<TAB>label"
//   pair            "c c<TAB>c c c<TAB>label"

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "core/atlas.hpp"
#include "core/metrics.hpp"

namespace glyce {

enum class TaskKind { kTagging, kClassification, kPair };

std::string to_string(TaskKind k);
TaskKind parse_task_kind(const std::string& s);

struct Example {
  std::vector<CharId> s1;
  std::vector<CharId> s2;        ///< pair task only
  std::vector<std::size_t> tags;  ///< tagging: label index per character
  std::size_t label = 0;          ///< classification and pair
};

struct LabeledCorpus {
  TaskKind task = TaskKind::kTagging;
  std::uint32_t n_chars = 0;
  std::vector<std::string> label_names;  ///< tag alphabet or class names
  TagScheme scheme = TagScheme::kBmes;   ///< tagging only
  std::uint64_t seed = 0;
  std::vector<Example> examples;
  std::vector<std::size_t> train, dev, test;

  std::size_t n_labels() const { return label_names.size(); }
  /// Stable content hash (hex), used to tie reports to one dataset.
  std::string fingerprint() const;
  /// Largest character id referenced plus one (0 if none).
  std::uint32_t max_char_plus_one() const;
  /// VocabError naming the first character outside the atlas.
  void require_covered_by(const GlyphAtlas& atlas) const;
};

/// BMES tag names in index order.
const std::vector<std::string>& bmes_labels();

LabeledCorpus gen_tagging_corpus(const GlyphAtlas& atlas, std::size_t n_sentences,
                                 std::uint64_t seed);
LabeledCorpus gen_classification_corpus(const GlyphAtlas& atlas, std::size_t n_docs,
                                        std::size_t n_classes, std::uint64_t seed);
LabeledCorpus gen_pair_corpus(const GlyphAtlas& atlas, std::size_t n_pairs, std::uint64_t seed);

/// The generating rule applied to characters alone; reproduces gold exactly.
std::vector<std::size_t> rule_tags(const std::vector<CharId>& s, std::uint32_t n_chars);
std::size_t rule_class(const std::vector<CharId>& s, std::uint32_t n_chars);
std::size_t rule_pair(const std::vector<CharId>& s1, const std::vector<CharId>& s2,
                      std::uint32_t n_chars);

/// Most frequent family in s; ties go to the lower family index.
std::uint32_t dominant_family(const std::vector<CharId>& s, std::uint32_t n_chars);

void save_corpus(const LabeledCorpus& c, const std::filesystem::path& dir);
LabeledCorpus load_corpus(const std::filesystem::path& dir);

}  // namespace glyce
