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

// Output heads: linear-chain CRF for tagging, CLS-row softmax for single
// sentences and packed pairs.

#pragma once

#include <vector>

#include "core/tensor.hpp"

namespace glyce {

/// Transition matrix layout for K labels: [K+2, K+2], trans[i][j] scores
/// i -> j. Row/column K is the virtual start state, K+1 the stop state.
inline std::size_t crf_start(std::size_t k) { return k; }
inline std::size_t crf_stop(std::size_t k) { return k + 1; }

/// Emissions [L,K] plus transitions along `labels`, start and stop included.
ad::Var crf_score(const ad::Var& emissions, const ad::Var& transitions,
                  const std::vector<std::size_t>& labels);

/// log of the sum over all K^L label paths of exp(score). The backward pass
/// uses forward-backward marginals.
ad::Var crf_log_partition(const ad::Var& emissions, const ad::Var& transitions);

/// log_partition - score.
ad::Var crf_nll(const ad::Var& emissions, const ad::Var& transitions,
                const std::vector<std::size_t>& labels);

struct CrfPath {
  std::vector<std::size_t> labels;
  double score = 0.0;
};

/// Highest-scoring path. Ties go to the lower label index.
CrfPath crf_viterbi(const ad::Tensor& emissions, const ad::Tensor& transitions);

/// dense(x[0]) over the class count: logits read from the CLS row.
ad::Var cls_logits(const ad::Var& task_outputs, const ad::Var& weight, const ad::Var& bias);

/// softmax of cls_logits as a [C] vector.
ad::Var classify_single(const ad::Var& task_outputs, const ad::Var& weight, const ad::Var& bias);

struct PackedPair {
  std::vector<std::size_t> tokens;
  std::vector<std::size_t> segments;
};

/// [CLS, s1..., SEP, s2..., SEP] as token ids; segment 0 through the first
/// SEP, 1 after it. ContractError if the result exceeds max_len.
PackedPair pack_pair(const std::vector<std::size_t>& s1, const std::vector<std::size_t>& s2,
                     std::size_t max_len);

/// [CLS, s..., SEP], all segment 0.
PackedPair pack_single(const std::vector<std::size_t>& s, std::size_t max_len);

}  // namespace glyce
