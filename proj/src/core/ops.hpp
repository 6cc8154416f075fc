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

// Differentiable primitives. Every op checks shapes explicitly and never
// broadcasts; each records exactly one graph node.

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "core/tensor.hpp"

namespace glyce::ad {

/// Valid (unpadded) 2-D convolution. input [C_in,H,W], kernels
/// [C_out, C_in/groups, k, k] -> [C_out, H', W'] with H' = (H-k)/stride + 1.
Var conv2d(const Var& input, const Var& kernels, std::size_t stride, std::size_t groups);
/// Same, plus a per-output-channel bias [C_out].
Var conv2d(const Var& input, const Var& kernels, const Var& bias, std::size_t stride,
           std::size_t groups);

/// Non-overlapping max pooling with window and stride k. Ties resolve to the
/// lowest row-major index in the window.
Var maxpool2d(const Var& input, std::size_t k);
/// [C,H,W] -> [C], mean over the spatial extent.
Var global_avg_pool(const Var& input);
/// [C,H,W] -> [C,h,w] window starting at (top, left).
Var crop2d(const Var& input, std::size_t top, std::size_t left, std::size_t h, std::size_t w);

Var relu(const Var& x);
Var sigmoid(const Var& x);
Var tanh(const Var& x);

Var add(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& x, double s);
Var reshape(const Var& x, Shape shape);

/// weight [m,n] . input [n] + bias [m].
Var dense(const Var& input, const Var& weight, const Var& bias);
Var dense(const Var& input, const Var& weight);
/// Row-wise dense: input [L,n] -> [L,m].
Var linear(const Var& input, const Var& weight, const Var& bias);
Var linear(const Var& input, const Var& weight);

/// a [m,k] . b [k,n]
Var matmul(const Var& a, const Var& b);
/// a [m,k] . b^T where b is [n,k]
Var matmul_nt(const Var& a, const Var& b);

/// Row-wise softmax over [r,c]. Columns with key_valid[j] == false get zero
/// probability; at least one column must be valid.
Var softmax_rows(const Var& x, const std::vector<bool>& key_valid = {});

/// Half-open slice [begin, end) along `axis`.
Var slice(const Var& x, std::size_t axis, std::size_t begin, std::size_t end);
/// Row i of a rank-2 tensor as a rank-1 tensor.
Var row(const Var& x, std::size_t i);
Var concat(const std::vector<Var>& parts, std::size_t axis);
/// Stacks equal-shape rank-1 tensors [d] into [n,d].
Var stack_rows(const std::vector<Var>& rows);
/// out[i] = x[i - offset] for rank-2 x; rows shifted in from outside are zero.
Var shift_rows(const Var& x, long offset);

/// Normalizes over the last axis, then applies gamma/beta of that width.
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);

/// table [V,d], ids -> [len(ids), d].
Var embedding(const Var& table, const std::vector<std::size_t>& ids);

/// -log softmax(logits)[target] as a scalar [1].
Var softmax_cross_entropy(const Var& logits, std::size_t target);

Var sum(const std::vector<Var>& xs);
Var mean(const std::vector<Var>& xs);

}  // namespace glyce::ad
