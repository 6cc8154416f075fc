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

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
// if any fails.
//
//   acceptance            all ten criteria
//   acceptance 3 5 9      a subset, by number

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/atlas.hpp"
#include "core/binary_io.hpp"
#include "core/checkpoint.hpp"
#include "core/error.hpp"
#include "core/grad_check.hpp"
#include "core/heads.hpp"
#include "core/objectives.hpp"
#include "core/ops.hpp"
#include "core/tianzige.hpp"
#include "core/trainer.hpp"
#include "core/workflow.hpp"
#include "support/crf_oracle.hpp"
#include "support/primitive_cases.hpp"
#include "support/test_util.hpp"
#include "support/tiny_run.hpp"

#ifndef GLYCE_CLI_PATH
#error "GLYCE_CLI_PATH must name the glyce executable"
#endif
#ifndef GLYCE_FIXTURE_DIR
#error "GLYCE_FIXTURE_DIR must name tests/fixtures"
#endif

namespace glyce {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

/// Collects failed checks of one criterion; the first few are reported.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++count_;
    if (!ok) failures_.push_back(what);
  }
  bool ok() const { return failures_.empty(); }
  std::size_t count() const { return count_; }
  std::string summary() const {
    std::string s = std::to_string(failures_.size()) + " of " + std::to_string(count_) +
                    " checks failed";
    for (std::size_t i = 0; i < failures_.size() && i < 3; ++i) s += "; " + failures_[i];
    return s;
  }

 private:
  std::size_t count_ = 0;
  std::vector<std::string> failures_;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---- 1: gradient suite ------------------------------------------------------

RunConfig micro_config(Rng& rng, const std::string& task) {
  static const char* layers[] = {"transformer", "bilstm", "cnn", "none"};
  static const char* cnns[] = {"tianzige", "vanilla", "deep-residual"};
  RunConfig rc;
  rc.merge_text(
      "d_ctx=4\nctx_layers=1\nctx_heads=2\nmax_len=40\nffn_mult=2\n"
      "c_conv=4\nc_mid=2\nd_glyph=4\ngroups_1=2\ngroups_2=2\ntask_layers=1\ntask_heads=2\n",
      "micro");
  rc.set("task", task);
  rc.set("task_layer", layers[rng.below(4)]);
  rc.set("cnn", cnns[rng.below(3)]);
  return rc;
}

/// One randomized end-to-end check: glyphs through the CNN, fusion, context
/// encoder, task layer and head, blended with the glyph loss.
double end_to_end_trial(Rng& rng, std::string* label) {
  static const char* tasks[] = {"tagging", "classification", "pair"};
  const std::string task = tasks[rng.below(3)];
  const RunConfig rc = micro_config(rng, task);
  const std::uint64_t seed = rng.next_u64() % 100000;
  const GlyphAtlas atlas = generate_synthetic_atlas(8, 2, 12, seed);
  LabeledCorpus corpus;
  if (task == "tagging") corpus = gen_tagging_corpus(atlas, 12, seed);
  if (task == "classification") corpus = gen_classification_corpus(atlas, 12, 2, seed);
  if (task == "pair") corpus = gen_pair_corpus(atlas, 12, seed);

  std::vector<std::size_t> order(corpus.examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = corpus.examples[a];
    const auto& y = corpus.examples[b];
    return x.s1.size() + x.s2.size() < y.s1.size() + y.s2.size();
  });
  const std::vector<std::size_t> batch(order.begin(), order.begin() + 1 + rng.below(2));

  GlyceModel m(ModelConfig::from(rc, atlas, corpus), seed);
  testing::jitter_biases(m.params(), seed + 1);
  std::vector<ad::TensorPtr> params;
  for (const auto& it : m.params().items()) params.push_back(it.tensor);
  const LambdaSchedule s{rng.uniform(0.05, 0.95), rng.uniform(0.5, 1.0)};
  const std::size_t t = rng.below(6);
  *label = task + "/" + rc.get("task_layer") + "/" + rc.get("cnn");
  return ad::grad_check_tensors(
      [&](ad::Graph& g) {
        Binder bind(g);
        const BatchOutput out = m.forward(bind, atlas, corpus, batch, false);
        return combined_loss(out.task_loss, out.cls_loss, s, t).total;
      },
      params);
}

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  Checks c;
  Rng rng(2026);
  double worst_prim = 0.0;
  for (const auto& pc : testing::primitive_cases()) {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) worst = std::max(worst, pc.run(rng));
    c.expect(worst < 1e-4, pc.name + " rel err " + fmt(worst));
    worst_prim = std::max(worst_prim, worst);
  }
  double worst_e2e = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::string label;
    const double err = end_to_end_trial(rng, &label);
    c.expect(err < 1e-4, "end-to-end " + label + " rel err " + fmt(err));
    worst_e2e = std::max(worst_e2e, err);
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 120.0, "runtime " + fmt(secs) + " s >= 120 s");
  return {c.ok(), std::to_string(testing::primitive_cases().size()) +
                      " primitives x 100 trials, worst " + fmt(worst_prim) +
                      " (per element); 100 end-to-end trials, worst " + fmt(worst_e2e) +
                      " (per tensor)" + "; " + fmt(secs) +
                      " s" + (c.ok() ? "" : "; " + c.summary())};
}

// ---- 2: shape chain ---------------------------------------------------------

Outcome shape_chain() {
  Checks c;
  for (std::size_t scripts : {1u, 2u, 8u}) {
    TianzigeCnnConfig cfg;
    cfg.n_scripts = scripts;
    const auto p = init_params(cfg, 10, scripts);
    Rng rng(scripts);
    ad::Graph g;
    Binder bind(g);
    std::vector<ad::Shape> trace;
    embed(p, bind, g.constant(*testing::random_tensor({scripts, 12, 12}, rng, 0, 1)), &trace);
    const std::string tag = std::to_string(scripts) + " scripts: ";
    c.expect(trace.size() >= 2, tag + "trace too short");
    if (trace.size() < 2) continue;
    c.expect(trace[0].size() == 3 && trace[0][1] == 8 && trace[0][2] == 8,
             tag + "after conv " + ad::shape_str(trace[0]));
    c.expect(trace[1].size() == 3 && trace[1][1] == 2 && trace[1][2] == 2,
             tag + "after pool " + ad::shape_str(trace[1]));
  }
  return {c.ok(), "1, 2, 8 scripts: [.,8,8] after conv, [.,2,2] after pool" +
                      (c.ok() ? std::string() : "; " + c.summary())};
}

// ---- 3: group-conv oracle ---------------------------------------------------

Outcome group_conv_oracle() {
  Checks c;
  Rng rng(303);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t groups = 1 + rng.below(4);
    const std::size_t ci = groups * (1 + rng.below(3)), co = groups * (1 + rng.below(3));
    const std::size_t k = 1 + rng.below(3), stride = 1 + rng.below(2);
    const std::size_t h = k + rng.below(6), w = k + rng.below(6);
    const auto x = testing::random_tensor({ci, h, w}, rng);
    const auto kg = testing::random_tensor({co, ci / groups, k, k}, rng);
    const auto b = testing::random_tensor({co}, rng);
    ad::Tensor full({co, ci, k, k}, 0.0);
    const std::size_t in_g = ci / groups, out_g = co / groups, kk = k * k;
    for (std::size_t o = 0; o < co; ++o)
      for (std::size_t i = 0; i < in_g; ++i)
        for (std::size_t q = 0; q < kk; ++q)
          full.values[(o * ci + (o / out_g) * in_g + i) * kk + q] = kg->values[(o * in_g + i) * kk + q];
    ad::Graph g;
    const auto got = ad::conv2d(g.constant(*x), g.constant(*kg), g.constant(*b), stride, groups);
    const auto ref = ad::conv2d(g.constant(*x), g.constant(full), g.constant(*b), stride, 1);
    const double d = testing::max_abs_diff(got.tensor().values, ref.tensor().values);
    worst = std::max(worst, d);
    c.expect(got.shape() == ref.shape() && d < 1e-10,
             "config " + std::to_string(trial) + " diff " + fmt(d));
  }
  return {c.ok(), "50 configurations, max abs diff " + fmt(worst) +
                      (c.ok() ? std::string() : "; " + c.summary())};
}

// ---- 4: glyph loss and blend ------------------------------------------------

Outcome loss_exactness() {
  Checks c;
  Rng rng(404);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(20), d = 1 + rng.below(16);
    const auto h = testing::random_tensor({d}, rng);
    const auto W = testing::random_tensor({n, d}, rng, -2, 2);
    const auto b = testing::random_tensor({n}, rng);
    const std::size_t id = rng.below(n);
    ad::Graph g;
    const double got = image_cls_loss(g.constant(*h), g.constant(*W), g.constant(*b), id).item();
    std::vector<long double> z(n);
    for (std::size_t r = 0; r < n; ++r) {
      z[r] = b->values[r];
      for (std::size_t j = 0; j < d; ++j) z[r] += (long double)W->values[r * d + j] * h->values[j];
    }
    long double denom = 0;
    for (auto v : z) denom += std::exp(v);
    const double want = static_cast<double>(-std::log(std::exp(z[id]) / denom));
    worst = std::max(worst, std::fabs(got - want));
    c.expect(std::fabs(got - want) < 1e-12, "softmax oracle diff " + fmt(got - want));
  }
  for (int trial = 0; trial < 100; ++trial) {
    ad::Graph g;
    const auto task = g.constant(ad::Tensor({1}, rng.uniform(0, 5)));
    const auto cls = g.constant(ad::Tensor({1}, rng.uniform(0, 5)));
    const std::size_t t = rng.below(50);
    c.expect(combined_loss(task, cls, {0.0, rng.uniform()}, t).total.item() == task.item(),
             "lambda 0 endpoint");
    c.expect(combined_loss(task, cls, {1.0, 1.0}, t).total.item() == cls.item(),
             "lambda 1 endpoint");
  }
  for (int trial = 0; trial < 20; ++trial) {
    const LambdaSchedule s{rng.uniform(), rng.uniform()};
    double prev = INFINITY, repeated = s.lambda0;
    for (std::size_t t = 0; t <= 50; ++t) {
      const double l = lambda_at(s, t);
      c.expect(l == s.lambda0 * std::pow(s.lambda1, static_cast<double>(t)),
               "lambda(" + std::to_string(t) + ") != l0 * pow(l1, t)");
      c.expect(std::fabs(l - repeated) <= 1e-15 * std::max(1.0, repeated) + 1e-300,
               "lambda(" + std::to_string(t) + ") drifts from repeated product");
      c.expect(l <= prev, "lambda increased at t=" + std::to_string(t));
      prev = l;
      repeated *= s.lambda1;
    }
  }
  return {c.ok(), "softmax oracle worst " + fmt(worst) + ", endpoints bit-exact, schedule t=0..50" +
                      (c.ok() ? std::string() : "; " + c.summary())};
}

// ---- 5: CRF oracle ----------------------------------------------------------

Outcome crf_oracle() {
  Checks c;
  Rng rng(505);
  double worst = 0.0, worst_sum = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t len = 1 + rng.below(4), k = 1 + rng.below(4);
    const auto e = testing::random_tensor({len, k}, rng, -2, 2);
    const auto tr = testing::random_tensor({k + 2, k + 2}, rng, -2, 2);
    const testing::BruteCrf brute{len, k, e->values, tr->values};
    ad::Graph g;
    const auto ev = g.constant(*e), tv = g.constant(*tr);
    const double lz = crf_log_partition(ev, tv).item();
    const double want_lz = brute.log_partition();
    worst = std::max(worst, std::fabs(lz - want_lz));
    c.expect(std::fabs(lz - want_lz) < 1e-9, "log-partition diff " + fmt(lz - want_lz));

    std::vector<std::size_t> y(len);
    for (auto& v : y) v = rng.below(k);
    const double nll = crf_nll(ev, tv, y).item();
    const double want_nll = want_lz - brute.path_score(y);
    worst = std::max(worst, std::fabs(nll - want_nll));
    c.expect(std::fabs(nll - want_nll) < 1e-9, "nll diff " + fmt(nll - want_nll));

    const auto v = crf_viterbi(*e, *tr);
    const auto [best, arg] = brute.best();
    c.expect(std::fabs(v.score - best) < 1e-9 && v.labels == arg, "viterbi path differs");

    double total = 0.0;
    brute.for_each_path([&](const std::vector<std::size_t>& p) {
      ad::Graph h;
      total += std::exp(crf_score(h.constant(*e), h.constant(*tr), p).item() - lz);
    });
    worst_sum = std::max(worst_sum, std::fabs(total - 1.0));
    c.expect(std::fabs(total - 1.0) < 1e-9, "path probabilities sum to " + fmt(total, 17));
  }
  return {c.ok(), "200 instances, worst diff " + fmt(worst) + ", worst |sum-1| " + fmt(worst_sum) +
                      (c.ok() ? std::string() : "; " + c.summary())};
}

// ---- 6: overfit capacity ----------------------------------------------------

double glyph_train_accuracy(const TianzigeCnnParams& p, const GlyphAtlas& atlas) {
  const auto& W = p["cls.w"]->values;
  const auto& b = p["cls.b"]->values;
  const std::size_t n = atlas.n_chars(), d = p.config.d_glyph;
  std::size_t hits = 0;
  for (CharId ch = 0; ch < n; ++ch) {
    const auto h = embed(p, atlas.lookup(ch)).values;
    std::size_t arg = 0;
    double best = -INFINITY;
    for (std::size_t r = 0; r < n; ++r) {
      double z = b[r];
      for (std::size_t j = 0; j < d; ++j) z += W[r * d + j] * h[j];
      if (z > best) best = z, arg = r;
    }
    hits += arg == ch ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

Outcome overfit_capacity() {
  const auto t0 = Clock::now();
  const GlyphAtlas atlas = generate_synthetic_atlas(100, 2, 12, 1);
  TianzigeCnnConfig cfg;
  cfg.n_scripts = 2;
  const auto p = init_params(cfg, atlas.n_chars(), 7);
  Adam opt(1e-3);
  Rng rng(11);
  std::vector<std::size_t> ids(atlas.n_chars());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  constexpr std::size_t kBatch = 10;
  double acc = glyph_train_accuracy(p, atlas);
  std::size_t epochs = 0;
  while (epochs < 200 && acc < 0.99) {
    rng.shuffle(ids);
    for (std::size_t at = 0; at < ids.size(); at += kBatch) {
      ad::Graph g;
      Binder bind(g);
      std::vector<ad::Var> hs;
      std::vector<std::size_t> batch;
      for (std::size_t i = at; i < std::min(ids.size(), at + kBatch); ++i) {
        hs.push_back(embed(p, bind, g.constant(atlas.lookup(static_cast<CharId>(ids[i])))));
        batch.push_back(ids[i]);
      }
      const auto loss = mean_image_cls_loss(hs, batch, bind(p["cls.w"]), bind(p["cls.b"]));
      p.params.zero_grad();
      g.backward(loss);
      opt.step(p.params);
    }
    ++epochs;
    acc = glyph_train_accuracy(p, atlas);
  }
  const double secs = seconds_since(t0);
  const bool ok = acc >= 0.99 && secs < 600.0;
  return {ok, "train accuracy " + fmt(100 * acc, 4) + "% after " + std::to_string(epochs) +
                  " epochs, " + fmt(secs) + " s"};
}

// ---- 7: end-to-end desk run -------------------------------------------------

Outcome desk_run() {
  const auto t0 = Clock::now();
  RunConfig rc;
  rc.set("task", "tagging");
  rc.set("strategy", "joint");
  rc.set("epochs_c", "100");
  rc.set("patience", "100");
  const Dataset d = synthetic_dataset(rc);
  Trainer t(rc, d.atlas, d.corpus);
  double best_f1 = 0.0;
  std::size_t reached = 0;
  t.on_epoch = [&](const EpochRecord& r) {
    best_f1 = std::max(best_f1, r.dev.f1);
    std::fprintf(stderr, "  [7] epoch %zu dev F1 %.4f\n", r.epoch, r.dev.f1);
    if (r.dev.f1 >= 0.95) {
      reached = r.epoch + 1;
      return false;
    }
    return true;
  };
  t.run();
  const double secs = seconds_since(t0);
  const bool ok = reached > 0 && reached <= 100 && secs < 1200.0;
  return {ok, "dev span F1 " + fmt(100 * best_f1, 4) + "% " +
                  (reached ? "reached at epoch " + std::to_string(reached)
                           : "never reached 95% in " + std::to_string(t.history().size()) +
                                 " epochs") +
                  ", " + fmt(secs) + " s"};
}

// ---- 8: ablation harness ----------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome ablation_harness() {
  const auto t0 = Clock::now();
  const fs::path dir = fs::temp_directory_path() / "glyce_acceptance_ablate";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cmd = "'" GLYCE_CLI_PATH "' ablate --grid all --task pair -o '" +
                          dir.string() + "' > '" + (dir / "stdout.txt").string() + "' 2> '" +
                          (dir / "stderr.txt").string() + "'";
  const int st = std::system(cmd.c_str());
  const double secs = seconds_since(t0);
  if (!WIFEXITED(st) || WEXITSTATUS(st) != 0) {
    return {false, "ablate exited with " + std::to_string(WEXITSTATUS(st)) + ": " +
                       slurp(dir / "stderr.txt").substr(0, 300)};
  }
  Checks c;
  struct Want {
    std::vector<std::string> rows;
    std::string baseline;
  };
  const std::vector<Want> want{
      {{"context-glyce-joint", "Glyph-Joint", "joint", "only context"}, "only context"},
      {{"W image-cls", "WO image-cls"}, "WO image-cls"},
      {{"Transformers", "BiLSTMs", "CNNs", "No task layer"}, "Transformers"},
      {{"Vanilla-CNN", "Deep-residual", "Tianzige-CNN"}, "Vanilla-CNN"}};
  std::vector<std::string> titles;
  std::map<std::string, std::vector<nlohmann::json>> rows;
  std::istringstream in(slurp(dir / "report.jsonl"));
  for (std::string line; std::getline(in, line);) {
    const auto j = nlohmann::json::parse(line);
    const std::string title = j["report"];
    if (rows.find(title) == rows.end()) titles.push_back(title);
    rows[title].push_back(j);
  }
  c.expect(titles.size() == 4, std::to_string(titles.size()) + " reports");
  std::size_t total = 0;
  for (std::size_t r = 0; r < std::min<std::size_t>(4, titles.size()); ++r) {
    const auto& got = rows[titles[r]];
    total += got.size();
    std::vector<std::string> names;
    const nlohmann::json* base = nullptr;
    for (const auto& j : got) {
      names.push_back(j["run"]);
      if (j["baseline"]) base = &j;
    }
    c.expect(names == want[r].rows, titles[r] + ": unexpected rows");
    c.expect(base && (*base)["run"] == want[r].baseline, titles[r] + ": baseline");
    if (!base) continue;
    for (const auto& j : got) {
      const double df1 = j["f1"].get<double>() - (*base)["f1"].get<double>();
      const double dacc = j["accuracy"].get<double>() - (*base)["accuracy"].get<double>();
      c.expect(j["delta_f1"].get<double>() == df1 && j["delta_accuracy"].get<double>() == dacc,
               titles[r] + ": delta of " + j["run"].get<std::string>());
    }
  }
  c.expect(total == 13, std::to_string(total) + " rows");
  const std::string text = slurp(dir / "stdout.txt");
  c.expect(text.find("not expected") != std::string::npos, "report lacks the scale caveat");
  c.expect(secs < 5400.0, "runtime " + fmt(secs) + " s >= 5400 s");
  std::fprintf(stderr, "%s", text.c_str());
  return {c.ok(), "4 reports, " + std::to_string(total) + " rows with deltas, " + fmt(secs) + " s" +
                      (c.ok() ? std::string() : "; " + c.summary())};
}

// ---- 9: determinism and persistence -----------------------------------------

std::string history_text(const Trainer& t) {
  std::string s;
  for (const auto& r : t.history()) s += to_json_line(r) + "\n";
  return s;
}

template <class E, class F>
bool throws(F&& f) {
  try {
    f();
  } catch (const E&) {
    return true;
  } catch (...) {
    return false;
  }
  return false;
}

Outcome determinism() {
  Checks c;
  const fs::path fix = GLYCE_FIXTURE_DIR;

  // Two identical runs, then resume at every epoch boundary.
  RunConfig rc = testing::tiny_config("tagging", "staged-joint");
  rc.set("patience", "3");
  const auto d = testing::tiny_data("tagging", 5);
  Trainer a(rc, d.atlas, d.corpus), b(rc, d.atlas, d.corpus);
  a.run();
  b.run();
  const auto want = serialize_checkpoint(a.checkpoint());
  c.expect(want == serialize_checkpoint(b.checkpoint()), "identical runs: checkpoints differ");
  c.expect(history_text(a) == history_text(b), "identical runs: histories differ");
  for (std::size_t k = 1; k < a.history().size(); ++k) {
    Trainer first(rc, d.atlas, d.corpus);
    first.run(k);
    const auto ck = parse_checkpoint(serialize_checkpoint(first.checkpoint()), "resume");
    auto resumed = Trainer::resume(ck, d.atlas, d.corpus, &rc);
    resumed->run();
    c.expect(serialize_checkpoint(resumed->checkpoint()) == want,
             "resume after " + std::to_string(k) + " epochs diverges");
    c.expect(history_text(*resumed) == history_text(a),
             "resumed history after " + std::to_string(k) + " epochs differs");
  }

  // Atlas format.
  const auto scratch = testing::scratch_dir("acceptance_formats");
  const auto atlas = generate_synthetic_atlas(3, 2, 12, 42);
  save_atlas(atlas, scratch / "a.gatl");
  const auto bytes = io::read_file(scratch / "a.gatl");
  c.expect(load_atlas(scratch / "a.gatl") == atlas, "atlas roundtrip");
  c.expect(io::read_file(fix / "atlas_3x2x12_seed42.gatl") == bytes, "atlas golden fixture");
  for (const char* bad : {"atlas_bad_magic.gatl", "atlas_bad_version.gatl", "atlas_truncated.gatl",
                          "atlas_trailing.gatl", "atlas_count_mismatch.gatl"}) {
    c.expect(throws<FormatError>([&] { load_atlas(fix / bad); }), std::string(bad) + " accepted");
  }

  // Checkpoint format.
  const auto ck = load_checkpoint(fix / "checkpoint_small.gckp");
  c.expect(serialize_checkpoint(ck) == io::read_file(fix / "checkpoint_small.gckp"),
           "checkpoint fixture does not roundtrip");
  c.expect(serialize_checkpoint(parse_checkpoint(want, "mem")) == want, "checkpoint roundtrip");
  for (const char* bad : {"checkpoint_bad_magic.gckp", "checkpoint_bad_version.gckp",
                          "checkpoint_truncated.gckp", "checkpoint_trailing.gckp"}) {
    c.expect(throws<FormatError>([&] { load_checkpoint(fix / bad); }),
             std::string(bad) + " accepted");
  }
  return {c.ok(), std::to_string(c.count()) + " checks: identical runs, " +
                      std::to_string(a.history().size() - 1) +
                      " resume points, atlas and checkpoint fixtures" +
                      (c.ok() ? std::string() : "; " + c.summary())};
}

// ---- 10: freeze contract ----------------------------------------------------

std::map<std::string, std::vector<double>> snapshot(const GlyceModel& m, ParamGroup group) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& it : m.params().items())
    if (m.group_of(it.name) == group) out[it.name] = it.tensor->values;
  return out;
}

/// Runs `strategy` and checks that `frozen` is untouched across `stage` while
/// `moving` changes.
void check_freeze(Checks& c, const std::string& task, const std::string& strategy,
                  const std::string& stage, ParamGroup frozen, ParamGroup moving) {
  RunConfig rc;
  rc.merge_text("d_ctx=32\nctx_layers=1\nc_conv=32\nd_glyph=32\nn_sentences=150\nn_pairs=150\n"
                "epochs_a=2\nepochs_b=2\nepochs_c=1\npatience=100\n",
                "freeze");
  rc.set("task", task);
  rc.set("strategy", strategy);
  const Dataset d = synthetic_dataset(rc);
  Trainer t(rc, d.atlas, d.corpus);
  std::map<std::string, std::vector<double>> before_frozen, before_moving;
  bool seen = false;
  t.on_stage = [&](const std::string& s, bool entering) {
    if (s != stage) return;
    if (entering) {
      before_frozen = snapshot(t.model(), frozen);
      before_moving = snapshot(t.model(), moving);
      return;
    }
    seen = true;
    const auto after = snapshot(t.model(), frozen);
    c.expect(!after.empty(), strategy + ": no frozen parameters found");
    for (const auto& [name, values] : after)
      c.expect(values == before_frozen[name], strategy + " stage " + stage + ": " + name + " moved");
    c.expect(snapshot(t.model(), moving) != before_moving,
             strategy + " stage " + stage + ": trainable group did not move");
  };
  t.run();
  c.expect(seen, strategy + ": stage " + stage + " never ended");
}

Outcome freeze_contract() {
  Checks c;
  check_freeze(c, "tagging", "staged-joint", "A", ParamGroup::kGlyph, ParamGroup::kContext);
  check_freeze(c, "pair", "glyph-joint", "B", ParamGroup::kContext, ParamGroup::kGlyph);
  return {c.ok(), std::to_string(c.count()) +
                      " checks: glyph path fixed through staged-joint A, context encoder fixed "
                      "through glyph-joint B" +
                      (c.ok() ? std::string() : "; " + c.summary())};
}

}  // namespace
}  // namespace glyce

int main(int argc, char** argv) {
  using glyce::Outcome;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient suite", glyce::gradient_suite},
      {"shape chain", glyce::shape_chain},
      {"group-conv oracle", glyce::group_conv_oracle},
      {"glyph loss and blend exactness", glyce::loss_exactness},
      {"CRF oracle", glyce::crf_oracle},
      {"overfit capacity", glyce::overfit_capacity},
      {"end-to-end desk run", glyce::desk_run},
      {"ablation harness", glyce::ablation_harness},
      {"determinism and persistence", glyce::determinism},
      {"training-strategy freeze contract", glyce::freeze_contract},
  };
  std::set<std::size_t> pick;
  for (int i = 1; i < argc; ++i) {
    const int n = std::atoi(argv[i]);
    if (n < 1 || n > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "usage: %s [criterion 1-10 ...]\n", argv[0]);
      return 64;
    }
    pick.insert(static_cast<std::size_t>(n));
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!pick.empty() && pick.count(i + 1) == 0) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s  %2zu  %-34s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
