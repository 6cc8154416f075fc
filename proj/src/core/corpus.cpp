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

#include "core/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace glyce {

namespace {

constexpr std::size_t kMaxRun = 4;
constexpr int kTagMinLen = 10, kTagMaxLen = 30;
constexpr int kDocMinLen = 10, kDocMaxLen = 30;
constexpr int kPairMinLen = 5, kPairMaxLen = 15;

enum Bmes : std::size_t { kB = 0, kM = 1, kE = 2, kS = 3 };

/// Characters of one family, ascending.
std::vector<std::vector<CharId>> families(std::uint32_t n_chars) {
  std::vector<std::vector<CharId>> f(motif_family_count(n_chars));
  for (CharId c = 0; c < n_chars; ++c) f[motif_family(c, n_chars)].push_back(c);
  return f;
}

/// Exactly balanced labels i % n, shuffled.
std::vector<std::size_t> balanced_labels(std::size_t count, std::size_t n, Rng& rng) {
  std::vector<std::size_t> y(count);
  for (std::size_t i = 0; i < count; ++i) y[i] = i % n;
  rng.shuffle(y);
  return y;
}

void split(LabeledCorpus& c, Rng& rng) {
  std::vector<std::size_t> idx(c.examples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  rng.shuffle(idx);
  const std::size_t n = idx.size();
  const std::size_t n_train = n * 8 / 10, n_dev = n / 10;
  c.train.assign(idx.begin(), idx.begin() + n_train);
  c.dev.assign(idx.begin() + n_train, idx.begin() + n_train + n_dev);
  c.test.assign(idx.begin() + n_train + n_dev, idx.end());
}

/// A sequence of `len` characters whose dominant family is `fam`, strictly
/// ahead of every other family.
std::vector<CharId> dominated_sequence(const std::vector<std::vector<CharId>>& fams,
                                       std::uint32_t fam, std::size_t len, Rng& rng) {
  const std::size_t n_dom = len / 2 + 1;
  std::vector<CharId> s;
  for (std::size_t i = 0; i < n_dom; ++i) s.push_back(fams[fam][rng.below(fams[fam].size())]);
  for (std::size_t i = n_dom; i < len; ++i) {
    std::uint32_t f = static_cast<std::uint32_t>(rng.below(fams.size() - 1));
    if (f >= fam) ++f;
    s.push_back(fams[f][rng.below(fams[f].size())]);
  }
  rng.shuffle(s);
  return s;
}

void check_atlas(const GlyphAtlas& atlas) {
  if (atlas.n_chars() < 2) throw ConfigError("corpus: atlas needs at least 2 characters");
}

std::string join_ids(const std::vector<CharId>& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(s[i]);
  }
  return out;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::size_t parse_uint(const std::string& tok, const std::string& where) {
  std::size_t v = 0;
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc() || p != tok.data() + tok.size()) {
    throw FormatError(where + ": expected a non-negative integer, found '" + tok + "'");
  }
  return v;
}

std::vector<CharId> parse_ids(const std::string& field, const std::string& where) {
  std::vector<CharId> out;
  std::istringstream is(field);
  std::string tok;
  while (is >> tok) out.push_back(static_cast<CharId>(parse_uint(tok, where)));
  return out;
}

}  // namespace

std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::kTagging: return "tagging";
    case TaskKind::kClassification: return "classification";
    case TaskKind::kPair: return "pair";
  }
  return "?";
}

TaskKind parse_task_kind(const std::string& s) {
  if (s == "tagging") return TaskKind::kTagging;
  if (s == "classification") return TaskKind::kClassification;
  if (s == "pair") return TaskKind::kPair;
  throw ConfigError("unknown task '" + s + "' (tagging|classification|pair)");
}

const std::vector<std::string>& bmes_labels() {
  static const std::vector<std::string> names{"B", "M", "E", "S"};
  return names;
}

std::string LabeledCorpus::fingerprint() const {
  // FNV-1a over a canonical text rendering.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  };
  mix(to_string(task));
  mix(std::to_string(n_chars));
  for (const auto& l : label_names) mix(l);
  // Split membership and order matter; storage order does not.
  for (const auto* part : {&train, &dev, &test}) {
    for (auto i : *part) {
      const auto& e = examples[i];
      mix(join_ids(e.s1));
      mix(join_ids(e.s2));
      for (auto t : e.tags) mix(std::to_string(t));
      mix(std::to_string(e.label));
    }
    mix("|");
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::uint32_t LabeledCorpus::max_char_plus_one() const {
  std::uint32_t m = 0;
  for (const auto& e : examples) {
    for (CharId c : e.s1) m = std::max(m, c + 1);
    for (CharId c : e.s2) m = std::max(m, c + 1);
  }
  return m;
}

void LabeledCorpus::require_covered_by(const GlyphAtlas& atlas) const {
  for (std::size_t i = 0; i < examples.size(); ++i) {
    for (const auto* s : {&examples[i].s1, &examples[i].s2}) {
      for (CharId c : *s) {
        if (c >= atlas.n_chars()) {
          throw VocabError("character id " + std::to_string(c) + " in example " +
                           std::to_string(i) + " is not covered by the atlas (" +
                           std::to_string(atlas.n_chars()) + " characters)");
        }
      }
    }
  }
}

std::uint32_t dominant_family(const std::vector<CharId>& s, std::uint32_t n_chars) {
  std::vector<std::size_t> count(motif_family_count(n_chars), 0);
  for (CharId c : s) ++count[motif_family(c, n_chars)];
  return static_cast<std::uint32_t>(std::max_element(count.begin(), count.end()) - count.begin());
}

std::vector<std::size_t> rule_tags(const std::vector<CharId>& s, std::uint32_t n_chars) {
  std::vector<std::size_t> tags(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = i + 1;
    const auto f = motif_family(s[i], n_chars);
    while (j < s.size() && motif_family(s[j], n_chars) == f) ++j;
    if (j - i == 1) {
      tags[i] = kS;
    } else {
      tags[i] = kB;
      for (std::size_t k = i + 1; k + 1 < j; ++k) tags[k] = kM;
      tags[j - 1] = kE;
    }
    i = j;
  }
  return tags;
}

std::size_t rule_class(const std::vector<CharId>& s, std::uint32_t n_chars) {
  return dominant_family(s, n_chars);
}

std::size_t rule_pair(const std::vector<CharId>& s1, const std::vector<CharId>& s2,
                      std::uint32_t n_chars) {
  return dominant_family(s1, n_chars) == dominant_family(s2, n_chars) ? 1 : 0;
}

LabeledCorpus gen_tagging_corpus(const GlyphAtlas& atlas, std::size_t n_sentences,
                                 std::uint64_t seed) {
  check_atlas(atlas);
  if (n_sentences < 10) throw ConfigError("tagging corpus: need at least 10 sentences");
  const auto fams = families(atlas.n_chars());
  Rng rng(seed);
  LabeledCorpus c;
  c.task = TaskKind::kTagging;
  c.n_chars = atlas.n_chars();
  c.label_names = bmes_labels();
  c.scheme = TagScheme::kBmes;
  c.seed = seed;
  for (std::size_t n = 0; n < n_sentences; ++n) {
    Example e;
    const std::size_t len = static_cast<std::size_t>(rng.range(kTagMinLen, kTagMaxLen));
    std::uint32_t prev = static_cast<std::uint32_t>(fams.size());
    while (e.s1.size() < len) {
      // Adjacent runs never share a family, so boundaries are recoverable.
      std::uint32_t f = static_cast<std::uint32_t>(rng.below(fams.size() - (prev < fams.size())));
      if (prev < fams.size() && f >= prev) ++f;
      const std::size_t run =
          std::min<std::size_t>(1 + rng.below(kMaxRun), len - e.s1.size());
      for (std::size_t k = 0; k < run; ++k) {
        e.s1.push_back(fams[f][rng.below(fams[f].size())]);
        e.tags.push_back(run == 1 ? kS : k == 0 ? kB : k + 1 == run ? kE : kM);
      }
      prev = f;
    }
    c.examples.push_back(std::move(e));
  }
  split(c, rng);
  return c;
}

LabeledCorpus gen_classification_corpus(const GlyphAtlas& atlas, std::size_t n_docs,
                                        std::size_t n_classes, std::uint64_t seed) {
  check_atlas(atlas);
  const auto fams = families(atlas.n_chars());
  if (n_classes < 2 || n_classes > fams.size()) {
    throw ConfigError("classification corpus: n_classes must lie in [2, " +
                      std::to_string(fams.size()) + "]");
  }
  if (n_docs < 10) throw ConfigError("classification corpus: need at least 10 documents");
  Rng rng(seed);
  LabeledCorpus c;
  c.task = TaskKind::kClassification;
  c.n_chars = atlas.n_chars();
  for (std::size_t k = 0; k < n_classes; ++k) c.label_names.push_back(std::to_string(k));
  c.seed = seed;
  for (std::size_t y : balanced_labels(n_docs, n_classes, rng)) {
    Example e;
    e.label = y;
    e.s1 = dominated_sequence(fams, static_cast<std::uint32_t>(y),
                              static_cast<std::size_t>(rng.range(kDocMinLen, kDocMaxLen)), rng);
    c.examples.push_back(std::move(e));
  }
  split(c, rng);
  return c;
}

LabeledCorpus gen_pair_corpus(const GlyphAtlas& atlas, std::size_t n_pairs, std::uint64_t seed) {
  check_atlas(atlas);
  if (n_pairs < 10) throw ConfigError("pair corpus: need at least 10 pairs");
  const auto fams = families(atlas.n_chars());
  Rng rng(seed);
  LabeledCorpus c;
  c.task = TaskKind::kPair;
  c.n_chars = atlas.n_chars();
  c.label_names = {"0", "1"};
  c.seed = seed;
  for (std::size_t y : balanced_labels(n_pairs, 2, rng)) {
    Example e;
    e.label = y;
    const auto f1 = static_cast<std::uint32_t>(rng.below(fams.size()));
    auto f2 = f1;
    if (y == 0) {
      f2 = static_cast<std::uint32_t>(rng.below(fams.size() - 1));
      if (f2 >= f1) ++f2;
    }
    e.s1 = dominated_sequence(fams, f1,
                              static_cast<std::size_t>(rng.range(kPairMinLen, kPairMaxLen)), rng);
    e.s2 = dominated_sequence(fams, f2,
                              static_cast<std::size_t>(rng.range(kPairMinLen, kPairMaxLen)), rng);
    c.examples.push_back(std::move(e));
  }
  split(c, rng);
  return c;
}

void save_corpus(const LabeledCorpus& c, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create corpus directory " + dir.string() + ": " + ec.message());
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw IoError("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto m = open("meta.txt");
    m << "format=glyce-corpus-1\n";
    m << "task=" << to_string(c.task) << "\n";
    m << "n_chars=" << c.n_chars << "\n";
    m << "labels=";
    for (std::size_t i = 0; i < c.label_names.size(); ++i) m << (i ? " " : "") << c.label_names[i];
    m << "\nscheme=" << to_string(c.scheme) << "\n";
    m << "seed=" << c.seed << "\n";
    m << "n_examples=" << c.examples.size() << "\n";
  }
  const std::pair<const char*, const std::vector<std::size_t>*> parts[] = {
      {"train.tsv", &c.train}, {"dev.tsv", &c.dev}, {"test.tsv", &c.test}};
  for (const auto& [name, idx] : parts) {
    auto f = open(name);
    for (std::size_t i : *idx) {
      const auto& e = c.examples[i];
      f << join_ids(e.s1);
      switch (c.task) {
        case TaskKind::kTagging:
          f << '\t';
          for (std::size_t k = 0; k < e.tags.size(); ++k)
            f << (k ? " " : "") << c.label_names[e.tags[k]];
          break;
        case TaskKind::kClassification:
          f << '\t' << c.label_names[e.label];
          break;
        case TaskKind::kPair:
          f << '\t' << join_ids(e.s2) << '\t' << c.label_names[e.label];
          break;
      }
      f << '\n';
    }
    if (!f) throw IoError("write failed for " + (dir / name).string());
  }
}

LabeledCorpus load_corpus(const std::filesystem::path& dir) {
  const auto meta_path = dir / "meta.txt";
  std::ifstream m(meta_path);
  if (!m) throw IoError("cannot open " + meta_path.string());
  std::map<std::string, std::string> meta;
  std::string line;
  for (std::size_t ln = 1; std::getline(m, line); ++ln) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(meta_path.string() + ":" + std::to_string(ln) + ": expected key=value");
    }
    meta[line.substr(0, eq)] = line.substr(eq + 1);
  }
  for (const char* key : {"format", "task", "n_chars", "labels"}) {
    if (!meta.count(key)) throw FormatError(meta_path.string() + ": missing key '" + key + "'");
  }
  if (meta["format"] != "glyce-corpus-1") {
    throw FormatError(meta_path.string() + ": unsupported format '" + meta["format"] + "'");
  }
  LabeledCorpus c;
  c.task = parse_task_kind(meta["task"]);
  c.n_chars = static_cast<std::uint32_t>(parse_uint(meta["n_chars"], meta_path.string()));
  {
    std::istringstream is(meta["labels"]);
    std::string l;
    while (is >> l) c.label_names.push_back(l);
  }
  if (c.label_names.empty()) throw FormatError(meta_path.string() + ": empty label list");
  if (meta.count("scheme")) c.scheme = parse_tag_scheme(meta["scheme"]);
  if (meta.count("seed")) c.seed = parse_uint(meta["seed"], meta_path.string());

  auto label_index = [&](const std::string& name, const std::string& where) {
    const auto it = std::find(c.label_names.begin(), c.label_names.end(), name);
    if (it == c.label_names.end()) throw FormatError(where + ": unknown label '" + name + "'");
    return static_cast<std::size_t>(it - c.label_names.begin());
  };

  const std::pair<const char*, std::vector<std::size_t>*> parts[] = {
      {"train.tsv", &c.train}, {"dev.tsv", &c.dev}, {"test.tsv", &c.test}};
  for (const auto& [name, idx] : parts) {
    const auto path = dir / name;
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path.string());
    for (std::size_t ln = 1; std::getline(f, line); ++ln) {
      if (line.empty()) continue;
      const std::string where = path.string() + ":" + std::to_string(ln);
      const auto fields = split_on(line, '\t');
      const std::size_t want = c.task == TaskKind::kPair ? 3 : 2;
      if (fields.size() != want) {
        throw FormatError(where + ": expected " + std::to_string(want) + " tab-separated fields, found " +
                          std::to_string(fields.size()));
      }
      Example e;
      e.s1 = parse_ids(fields[0], where);
      if (e.s1.empty()) throw FormatError(where + ": empty character sequence");
      switch (c.task) {
        case TaskKind::kTagging: {
          std::istringstream is(fields[1]);
          std::string tag;
          while (is >> tag) e.tags.push_back(label_index(tag, where));
          if (e.tags.size() != e.s1.size()) {
            throw FormatError(where + ": " + std::to_string(e.s1.size()) + " characters but " +
                              std::to_string(e.tags.size()) + " tags");
          }
          break;
        }
        case TaskKind::kClassification:
          e.label = label_index(fields[1], where);
          break;
        case TaskKind::kPair:
          e.s2 = parse_ids(fields[1], where);
          e.label = label_index(fields[2], where);
          break;
      }
      idx->push_back(c.examples.size());
      c.examples.push_back(std::move(e));
    }
  }
  if (c.train.empty() || c.dev.empty()) {
    throw FormatError(dir.string() + ": train and dev splits must be non-empty");
  }
  return c;
}

}  // namespace glyce
