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

#include "core/heads.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "core/context.hpp"
#include "core/error.hpp"
#include "core/ops.hpp"

namespace glyce {

namespace {

struct CrfDims {
  std::size_t len;
  std::size_t k;
};

CrfDims check_crf(const ad::Shape& e, const ad::Shape& t) {
  if (e.size() != 2) throw ShapeError("crf: emissions must be [L,K], got " + ad::shape_str(e));
  const CrfDims d{e[0], e[1]};
  if (t != ad::Shape{d.k + 2, d.k + 2}) {
    throw ShapeError("crf: transitions " + ad::shape_str(t) + " do not match " +
                     std::to_string(d.k) + " labels (expected [K+2,K+2])");
  }
  return d;
}

double log_sum_exp(const double* v, std::size_t n) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, v[i]);
  if (std::isinf(mx)) return mx;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - mx);
  return mx + std::log(s);
}

ad::Graph& graph_of(const ad::Var& v) {
  if (!v.valid() || v.graph() == nullptr) throw ContractError("crf: empty Var");
  return *v.graph();
}

}  // namespace

ad::Var crf_score(const ad::Var& emissions, const ad::Var& transitions,
                  const std::vector<std::size_t>& labels) {
  const auto d = check_crf(emissions.shape(), transitions.shape());
  if (labels.size() != d.len) {
    throw ShapeError("crf_score: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(d.len) + " positions");
  }
  for (std::size_t y : labels) {
    if (y >= d.k) {
      throw IndexError("crf_score: label " + std::to_string(y) + " out of range for " +
                       std::to_string(d.k) + " labels");
    }
  }
  const std::size_t n = d.k + 2;
  const auto& E = emissions.values();
  const auto& T = transitions.values();
  std::size_t prev = crf_start(d.k);
  double s = 0.0;
  for (std::size_t t = 0; t < d.len; ++t) {
    s += T[prev * n + labels[t]] + E[t * d.k + labels[t]];
    prev = labels[t];
  }
  s += T[prev * n + crf_stop(d.k)];

  return graph_of(emissions).record(
      ad::Tensor({1}, s), {emissions, transitions},
      [emissions, transitions, labels, d, n](const ad::Tensor& o) {
        const double g = o.grad[0];
        if (emissions.requires_grad()) {
          auto& ge = emissions.ptr()->grad;
          for (std::size_t t = 0; t < d.len; ++t) ge[t * d.k + labels[t]] += g;
        }
        if (transitions.requires_grad()) {
          auto& gt = transitions.ptr()->grad;
          std::size_t p = crf_start(d.k);
          for (std::size_t t = 0; t < d.len; ++t) {
            gt[p * n + labels[t]] += g;
            p = labels[t];
          }
          gt[p * n + crf_stop(d.k)] += g;
        }
      });
}

ad::Var crf_log_partition(const ad::Var& emissions, const ad::Var& transitions) {
  const auto d = check_crf(emissions.shape(), transitions.shape());
  if (d.len == 0 || d.k == 0) throw ShapeError("crf: empty emissions");
  const std::size_t L = d.len, K = d.k, n = K + 2, S = crf_start(K), P = crf_stop(K);
  const auto& E = emissions.values();
  const auto& T = transitions.values();

  std::vector<double> alpha(L * K), beta(L * K), buf(K);
  for (std::size_t j = 0; j < K; ++j) alpha[j] = T[S * n + j] + E[j];
  for (std::size_t t = 1; t < L; ++t) {
    for (std::size_t j = 0; j < K; ++j) {
      for (std::size_t i = 0; i < K; ++i) buf[i] = alpha[(t - 1) * K + i] + T[i * n + j];
      alpha[t * K + j] = log_sum_exp(buf.data(), K) + E[t * K + j];
    }
  }
  for (std::size_t j = 0; j < K; ++j) buf[j] = alpha[(L - 1) * K + j] + T[j * n + P];
  const double log_z = log_sum_exp(buf.data(), K);

  for (std::size_t i = 0; i < K; ++i) beta[(L - 1) * K + i] = T[i * n + P];
  for (std::size_t t = L - 1; t-- > 0;) {
    for (std::size_t i = 0; i < K; ++i) {
      for (std::size_t j = 0; j < K; ++j)
        buf[j] = T[i * n + j] + E[(t + 1) * K + j] + beta[(t + 1) * K + j];
      beta[t * K + i] = log_sum_exp(buf.data(), K);
    }
  }

  return graph_of(emissions).record(
      ad::Tensor({1}, log_z), {emissions, transitions},
      [emissions, transitions, alpha = std::move(alpha), beta = std::move(beta), log_z, L, K, n, S,
       P](const ad::Tensor& o) {
        const double g = o.grad[0];
        const auto& E = emissions.values();
        const auto& T = transitions.values();
        if (emissions.requires_grad()) {
          auto& ge = emissions.ptr()->grad;
          for (std::size_t t = 0; t < L; ++t)
            for (std::size_t j = 0; j < K; ++j)
              ge[t * K + j] += g * std::exp(alpha[t * K + j] + beta[t * K + j] - log_z);
        }
        if (transitions.requires_grad()) {
          auto& gt = transitions.ptr()->grad;
          for (std::size_t j = 0; j < K; ++j) {
            gt[S * n + j] += g * std::exp(alpha[j] + beta[j] - log_z);
            gt[j * n + P] += g * std::exp(alpha[(L - 1) * K + j] + T[j * n + P] - log_z);
          }
          for (std::size_t t = 1; t < L; ++t)
            for (std::size_t i = 0; i < K; ++i)
              for (std::size_t j = 0; j < K; ++j)
                gt[i * n + j] += g * std::exp(alpha[(t - 1) * K + i] + T[i * n + j] +
                                              E[t * K + j] + beta[t * K + j] - log_z);
        }
      });
}

ad::Var crf_nll(const ad::Var& emissions, const ad::Var& transitions,
                const std::vector<std::size_t>& labels) {
  const ad::Var score = crf_score(emissions, transitions, labels);
  return ad::add(crf_log_partition(emissions, transitions), ad::scale(score, -1.0));
}

CrfPath crf_viterbi(const ad::Tensor& emissions, const ad::Tensor& transitions) {
  const auto d = check_crf(emissions.shape, transitions.shape);
  if (d.len == 0 || d.k == 0) throw ShapeError("crf: empty emissions");
  const std::size_t L = d.len, K = d.k, n = K + 2, S = crf_start(K), P = crf_stop(K);
  const auto& E = emissions.values;
  const auto& T = transitions.values;
  std::vector<double> delta(L * K);
  std::vector<std::size_t> back(L * K, 0);
  for (std::size_t j = 0; j < K; ++j) delta[j] = T[S * n + j] + E[j];
  for (std::size_t t = 1; t < L; ++t) {
    for (std::size_t j = 0; j < K; ++j) {
      std::size_t best = 0;
      double bv = delta[(t - 1) * K] + T[j];
      for (std::size_t i = 1; i < K; ++i) {
        const double v = delta[(t - 1) * K + i] + T[i * n + j];
        if (v > bv) bv = v, best = i;
      }
      delta[t * K + j] = bv + E[t * K + j];
      back[t * K + j] = best;
    }
  }
  std::size_t last = 0;
  double bv = delta[(L - 1) * K] + T[P];
  for (std::size_t j = 1; j < K; ++j) {
    const double v = delta[(L - 1) * K + j] + T[j * n + P];
    if (v > bv) bv = v, last = j;
  }
  CrfPath out;
  out.score = bv;
  out.labels.assign(L, 0);
  out.labels[L - 1] = last;
  for (std::size_t t = L - 1; t > 0; --t) out.labels[t - 1] = back[t * K + out.labels[t]];
  return out;
}

ad::Var cls_logits(const ad::Var& task_outputs, const ad::Var& weight, const ad::Var& bias) {
  if (task_outputs.shape().size() != 2 || weight.shape().size() != 2 ||
      weight.shape()[1] != task_outputs.shape()[1]) {
    throw ShapeError("classify: head " + ad::shape_str(weight.shape()) + " does not fit rows " +
                     ad::shape_str(task_outputs.shape()));
  }
  return ad::dense(ad::row(task_outputs, 0), weight, bias);
}

ad::Var classify_single(const ad::Var& task_outputs, const ad::Var& weight, const ad::Var& bias) {
  const ad::Var z = cls_logits(task_outputs, weight, bias);
  const std::size_t c = z.shape()[0];
  return ad::reshape(ad::softmax_rows(ad::reshape(z, {1, c})), {c});
}

PackedPair pack_pair(const std::vector<std::size_t>& s1, const std::vector<std::size_t>& s2,
                     std::size_t max_len) {
  const std::size_t total = s1.size() + s2.size() + 3;
  if (total > max_len) {
    throw ContractError("pack_pair: packed length " + std::to_string(total) + " exceeds max_len " +
                        std::to_string(max_len));
  }
  PackedPair p;
  p.tokens.reserve(total);
  p.tokens.push_back(tokens::kCls);
  for (std::size_t c : s1) p.tokens.push_back(token_of_char(c));
  p.tokens.push_back(tokens::kSep);
  p.segments.assign(p.tokens.size(), 0);
  for (std::size_t c : s2) p.tokens.push_back(token_of_char(c));
  p.tokens.push_back(tokens::kSep);
  p.segments.resize(p.tokens.size(), 1);
  return p;
}

PackedPair pack_single(const std::vector<std::size_t>& s, std::size_t max_len) {
  if (s.size() + 2 > max_len) {
    throw ContractError("pack_single: packed length " + std::to_string(s.size() + 2) +
                        " exceeds max_len " + std::to_string(max_len));
  }
  PackedPair p;
  p.tokens.push_back(tokens::kCls);
  for (std::size_t c : s) p.tokens.push_back(token_of_char(c));
  p.tokens.push_back(tokens::kSep);
  p.segments.assign(p.tokens.size(), 0);
  return p;
}

}  // namespace glyce
