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

#include "core/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "core/error.hpp"

namespace glyce {

namespace {

struct Tag {
  char kind;  // O B I M E S
  std::string type;
};

Tag parse_tag(const std::string& label, TagScheme scheme) {
  const std::string allowed = scheme == TagScheme::kBio ? "OBI" : "BMES";
  if (label.empty() || allowed.find(label[0]) == std::string::npos ||
      (label.size() > 1 && (label[1] != '-' || label.size() == 2)) ||
      (label[0] == 'O' && label.size() > 1)) {
    throw InputError("unknown " + to_string(scheme) + " label '" + label + "'");
  }
  return {label[0], label.size() > 2 ? label.substr(2) : std::string()};
}

SpanF1 finish(std::size_t matched, std::size_t n_pred, std::size_t n_gold) {
  SpanF1 s;
  s.n_matched = matched;
  s.n_pred = n_pred;
  s.n_gold = n_gold;
  s.precision = n_pred ? static_cast<double>(matched) / n_pred : 0.0;
  s.recall = n_gold ? static_cast<double>(matched) / n_gold : 0.0;
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

}  // namespace

std::string to_string(TagScheme s) { return s == TagScheme::kBio ? "BIO" : "BMES"; }

TagScheme parse_tag_scheme(const std::string& s) {
  if (s == "BIO" || s == "bio") return TagScheme::kBio;
  if (s == "BMES" || s == "bmes") return TagScheme::kBmes;
  throw ConfigError("unknown tag scheme '" + s + "' (BIO|BMES)");
}

bool Span::operator<(const Span& o) const {
  return std::tie(begin, end, type) < std::tie(o.begin, o.end, o.type);
}

std::vector<Span> extract_spans(const std::vector<std::string>& labels, TagScheme scheme) {
  std::vector<Span> spans;
  bool open = false;
  Span cur;
  auto close = [&](std::size_t end) {
    if (open) {
      cur.end = end;
      spans.push_back(cur);
      open = false;
    }
  };
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Tag t = parse_tag(labels[i], scheme);
    const bool continues = open && cur.type == t.type;
    switch (t.kind) {
      case 'O':
        close(i);
        break;
      case 'B':
        close(i);
        cur = {i, i, t.type};
        open = true;
        break;
      case 'I':
      case 'M':
        if (!continues) {
          close(i);
          cur = {i, i, t.type};
          open = true;
        }
        break;
      case 'E':
        if (!continues) {
          close(i);
          cur = {i, i, t.type};
          open = true;
        }
        close(i + 1);
        break;
      case 'S':
        close(i);
        spans.push_back({i, i + 1, t.type});
        break;
    }
  }
  close(labels.size());
  return spans;
}

SpanF1 tagging_f1(const std::vector<std::vector<std::string>>& pred,
                  const std::vector<std::vector<std::string>>& gold, TagScheme scheme) {
  if (pred.size() != gold.size()) {
    throw ContractError("tagging_f1: " + std::to_string(pred.size()) + " predicted vs " +
                        std::to_string(gold.size()) + " gold sequences");
  }
  std::size_t matched = 0, n_pred = 0, n_gold = 0;
  for (std::size_t s = 0; s < pred.size(); ++s) {
    if (pred[s].size() != gold[s].size()) {
      throw ContractError("tagging_f1: sequence " + std::to_string(s) + " length mismatch");
    }
    const auto p = extract_spans(pred[s], scheme);
    const auto g = extract_spans(gold[s], scheme);
    const std::set<Span> gs(g.begin(), g.end());
    for (const auto& sp : p) matched += gs.count(sp);
    n_pred += p.size();
    n_gold += g.size();
  }
  return finish(matched, n_pred, n_gold);
}

SpanF1 tagging_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold,
                  TagScheme scheme) {
  return tagging_f1(std::vector<std::vector<std::string>>{pred},
                    std::vector<std::vector<std::string>>{gold}, scheme);
}

double accuracy(const std::vector<std::size_t>& pred, const std::vector<std::size_t>& gold) {
  if (pred.size() != gold.size() || gold.empty()) {
    throw ContractError("accuracy: need equal non-empty vectors, got " +
                        std::to_string(pred.size()) + " and " + std::to_string(gold.size()));
  }
  std::size_t ok = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) ok += pred[i] == gold[i];
  return static_cast<double>(ok) / gold.size();
}

SpanF1 macro_prf(const std::vector<std::size_t>& pred, const std::vector<std::size_t>& gold) {
  if (pred.size() != gold.size() || gold.empty()) {
    throw ContractError("macro_prf: need equal non-empty vectors");
  }
  std::set<std::size_t> classes(gold.begin(), gold.end());
  classes.insert(pred.begin(), pred.end());
  SpanF1 out;
  for (std::size_t c : classes) {
    std::size_t tp = 0, np = 0, ng = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      tp += pred[i] == c && gold[i] == c;
      np += pred[i] == c;
      ng += gold[i] == c;
    }
    const SpanF1 s = finish(tp, np, ng);
    out.precision += s.precision / classes.size();
    out.recall += s.recall / classes.size();
    out.f1 += s.f1 / classes.size();
    out.n_matched += tp;
  }
  out.n_pred = out.n_gold = gold.size();
  return out;
}

AblationReport ablation_report(const std::string& title, const std::vector<RunSummary>& runs,
                               const std::string& baseline) {
  if (runs.size() < 2) throw ContractError("ablation_report: needs at least two runs");
  AblationReport rep;
  rep.title = title;
  rep.dataset = runs.front().dataset;
  rep.baseline = baseline;
  const ReportRow* base = nullptr;
  for (const auto& run : runs) {
    if (run.dataset != rep.dataset) {
      throw ContractError("ablation_report: run '" + run.name + "' used dataset '" + run.dataset +
                          "', expected '" + rep.dataset + "'");
    }
    if (run.history.empty()) {
      throw ContractError("ablation_report: run '" + run.name + "' has no history");
    }
    ReportRow row;
    row.name = run.name;
    row.baseline = run.name == baseline;
    const EpochRecord* best = &run.history.front();
    for (const auto& e : run.history)
      if (e.dev.primary > best->dev.primary) best = &e;
    row.best_epoch = best->epoch;
    row.best = best->dev;
    rep.rows.push_back(row);
  }
  for (const auto& r : rep.rows)
    if (r.baseline) base = &r;
  if (base == nullptr) throw ContractError("ablation_report: no run named '" + baseline + "'");
  const DevMetrics b = base->best;
  for (auto& r : rep.rows) {
    r.delta_f1 = r.best.f1 - b.f1;
    r.delta_accuracy = r.best.accuracy - b.accuracy;
  }
  return rep;
}

std::string to_text(const AblationReport& r) {
  std::size_t w = 5;
  for (const auto& row : r.rows) w = std::max(w, row.name.size() + 2);
  std::ostringstream os;
  os << r.title << "  (dataset " << r.dataset << ", baseline \"" << r.baseline << "\")\n";
  os << std::left << std::setw(static_cast<int>(w)) << "Model" << std::right;
  for (const char* h : {"P", "R", "F1", "Acc", "dF1", "dAcc", "epoch"}) os << std::setw(9) << h;
  os << "\n" << std::fixed << std::setprecision(2);
  for (const auto& row : r.rows) {
    os << std::left << std::setw(static_cast<int>(w)) << (row.name + (row.baseline ? " *" : ""))
       << std::right;
    os << std::setw(9) << 100 * row.best.precision << std::setw(9) << 100 * row.best.recall
       << std::setw(9) << 100 * row.best.f1 << std::setw(9) << 100 * row.best.accuracy;
    std::ostringstream d1, d2;
    d1 << std::fixed << std::setprecision(2) << std::showpos << 100 * row.delta_f1;
    d2 << std::fixed << std::setprecision(2) << std::showpos << 100 * row.delta_accuracy;
    os << std::setw(9) << d1.str() << std::setw(9) << d2.str() << std::setw(9) << row.best_epoch
       << "\n";
  }
  return os.str();
}

std::string to_json_line(const EpochRecord& r) {
  nlohmann::ordered_json j;
  j["epoch"] = r.epoch;
  j["stage"] = r.stage;
  j["lambda"] = r.lambda;
  j["train_loss"] = r.train_loss;
  j["task_loss"] = r.task_loss;
  j["cls_loss"] = r.cls_loss;
  j["dev_precision"] = r.dev.precision;
  j["dev_recall"] = r.dev.recall;
  j["dev_f1"] = r.dev.f1;
  j["dev_accuracy"] = r.dev.accuracy;
  j["dev_primary"] = r.dev.primary;
  return j.dump();
}

EpochRecord parse_epoch_record(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    EpochRecord r;
    r.epoch = j.at("epoch").get<std::size_t>();
    r.stage = j.at("stage").get<std::string>();
    r.lambda = j.at("lambda").get<double>();
    r.train_loss = j.at("train_loss").get<double>();
    r.task_loss = j.at("task_loss").get<double>();
    r.cls_loss = j.at("cls_loss").get<double>();
    r.dev.precision = j.at("dev_precision").get<double>();
    r.dev.recall = j.at("dev_recall").get<double>();
    r.dev.f1 = j.at("dev_f1").get<double>();
    r.dev.accuracy = j.at("dev_accuracy").get<double>();
    r.dev.primary = j.at("dev_primary").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("history record: ") + e.what());
  }
}

std::string to_json_lines(const AblationReport& r) {
  std::string out;
  for (const auto& row : r.rows) {
    nlohmann::ordered_json j;
    j["report"] = r.title;
    j["dataset"] = r.dataset;
    j["run"] = row.name;
    j["baseline"] = row.baseline;
    j["best_epoch"] = row.best_epoch;
    j["precision"] = row.best.precision;
    j["recall"] = row.best.recall;
    j["f1"] = row.best.f1;
    j["accuracy"] = row.best.accuracy;
    j["delta_f1"] = row.delta_f1;
    j["delta_accuracy"] = row.delta_accuracy;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace glyce
