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

// Exhaustive-path reference for small linear-chain CRFs.

#pragma once

#include <cmath>
#include <vector>

namespace glyce::testing {

struct BruteCrf {
  std::size_t len, k;
  std::vector<double> e;  // [L,K]
  std::vector<double> t;  // [K+2,K+2]

  double path_score(const std::vector<std::size_t>& y) const {
    const std::size_t n = k + 2;
    double s = t[k * n + y[0]] + e[y[0]];
    for (std::size_t i = 1; i < len; ++i) s += t[y[i - 1] * n + y[i]] + e[i * k + y[i]];
    return s + t[y[len - 1] * n + k + 1];
  }

  /// Calls f(path) for every path in lexicographic order.
  template <typename F>
  void for_each_path(F f) const {
    std::vector<std::size_t> y(len, 0);
    while (true) {
      f(y);
      std::size_t i = len;
      while (i > 0 && ++y[i - 1] == k) y[--i] = 0;
      if (i == 0) return;
    }
  }

  double log_partition() const {
    // Plain sum of exponentials; fine for the small magnitudes used in tests.
    double z = 0.0;
    for_each_path([&](const std::vector<std::size_t>& y) { z += std::exp(path_score(y)); });
    return std::log(z);
  }

  /// Best score and the first path reaching it in lexicographic order.
  std::pair<double, std::vector<std::size_t>> best() const {
    double b = -INFINITY;
    std::vector<std::size_t> arg;
    for_each_path([&](const std::vector<std::size_t>& y) {
      const double s = path_score(y);
      if (s > b) b = s, arg = y;
    });
    return {b, arg};
  }
};

}  // namespace glyce::testing
