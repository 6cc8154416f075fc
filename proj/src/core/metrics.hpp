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

#pragma once

#include <map>
#include <string>
#include <vector>

namespace glyce {

enum class TagScheme { kBio, kBmes };

std::string to_string(TagScheme s);
TagScheme parse_tag_scheme(const std::string& s);

/// Half-open [begin, end) with an entity type ("" when untyped).
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string type;

  bool operator<(const Span& o) const;
  bool operator==(const Span& o) const = default;
};

/// Decodes spans. Labels are "O", "B", "I" (BIO) or "B", "M", "E", "S"
/// (BMES), each optionally suffixed "-TYPE". An I/M/E that cannot continue
/// an open span of its type opens a new one. InputError on unknown labels.
std::vector<Span> extract_spans(const std::vector<std::string>& labels, TagScheme scheme);

struct SpanF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t n_gold = 0;
  std::size_t n_pred = 0;
  std::size_t n_matched = 0;
};

/// Exact-match span P/R/F1. Empty denominators give 0.
SpanF1 tagging_f1(const std::vector<std::vector<std::string>>& pred,
                  const std::vector<std::vector<std::string>>& gold, TagScheme scheme);
SpanF1 tagging_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold,
                  TagScheme scheme);

/// Fraction of equal positions.
double accuracy(const std::vector<std::size_t>& pred, const std::vector<std::size_t>& gold);

/// Macro-averaged precision/recall/F1 over classes that occur in gold or pred.
SpanF1 macro_prf(const std::vector<std::size_t>& pred, const std::vector<std::size_t>& gold);

// ---- ablation reporting ----------------------------------------------------

/// Dev-set metrics recorded once per epoch.
struct DevMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  /// The model-selection metric (span F1 for tagging, accuracy otherwise).
  double primary = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;  ///< global, 0-based
  std::string stage;      ///< "A", "B" or "C"
  double lambda = 0.0;
  double train_loss = 0.0;
  double task_loss = 0.0;
  double cls_loss = 0.0;
  DevMetrics dev;
};

/// One JSON object per line; doubles roundtrip exactly.
std::string to_json_line(const EpochRecord& r);
/// FormatError on malformed input.
EpochRecord parse_epoch_record(const std::string& line);

struct RunSummary {
  std::string name;
  std::string dataset;  ///< corpus fingerprint; all runs in a report must agree
  std::map<std::string, std::string> config;
  std::vector<EpochRecord> history;
};

struct ReportRow {
  std::string name;
  bool baseline = false;
  std::size_t best_epoch = 0;
  DevMetrics best;
  double delta_f1 = 0.0;
  double delta_accuracy = 0.0;
};

struct AblationReport {
  std::string title;
  std::string dataset;
  std::string baseline;
  std::vector<ReportRow> rows;
};

/// Best-dev row per run (earliest epoch on ties), in input order, with
/// deltas against the row named `baseline`. ContractError on fewer than two
/// runs, empty histories, differing datasets or an unknown baseline.
AblationReport ablation_report(const std::string& title, const std::vector<RunSummary>& runs,
                               const std::string& baseline);

/// Fixed-width table with values in percent; the baseline row is starred.
std::string to_text(const AblationReport& r);
/// One JSON object per row.
std::string to_json_lines(const AblationReport& r);

}  // namespace glyce
