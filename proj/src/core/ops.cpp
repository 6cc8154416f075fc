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

#include "core/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "core/error.hpp"

namespace glyce::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

Graph& graph_of(const Var& v) {
  if (!v.valid() || v.graph() == nullptr) throw ContractError("op applied to an empty Var");
  return *v.graph();
}

std::vector<double>& grad_of(const Var& v) { return v.ptr()->grad; }

// Products run on Eigen-owned copies. Vectorized kernels pick their peeling
// from the operand address, so heap placement would otherwise change the
// summation order between runs.
RowMat owned(const double* p, std::size_t r, std::size_t c) { return ConstMatMap(p, r, c); }

void store(double* dst, const RowMat& m) { std::copy(m.data(), m.data() + m.size(), dst); }

void accumulate(double* dst, const RowMat& m) {
  const double* src = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) dst[i] += src[i];
}

void require_rank(const Var& v, std::size_t rank, const char* op, const char* arg) {
  if (v.shape().size() != rank) {
    throw ShapeError(std::string(op) + ": " + arg + " must have rank " + std::to_string(rank) +
                     ", got " + shape_str(v.shape()));
  }
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
}

template <typename Fwd, typename Deriv>
Var unary(const Var& x, Fwd fwd, Deriv deriv) {
  Tensor out(x.shape());
  const auto& xv = x.values();
  for (std::size_t i = 0; i < xv.size(); ++i) out.values[i] = fwd(xv[i]);
  return graph_of(x).record(std::move(out), {x}, [x, deriv](const Tensor& o) {
    auto& g = grad_of(x);
    const auto& xv = x.values();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * deriv(xv[i], o.values[i]);
  });
}

Var conv2d_impl(const Var& x, const Var& k, const Var* b, std::size_t stride,
                std::size_t groups) {
  require_rank(x, 3, "conv2d", "input");
  require_rank(k, 4, "conv2d", "kernels");
  if (stride == 0 || groups == 0) throw ConfigError("conv2d: stride and groups must be positive");
  const std::size_t ci = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
  const std::size_t co = k.shape()[0], cig = k.shape()[1], kh = k.shape()[2], kw = k.shape()[3];
  if (ci % groups != 0 || co % groups != 0) {
    throw ConfigError("conv2d: channels (" + std::to_string(ci) + " in, " + std::to_string(co) +
                      " out) not divisible by groups=" + std::to_string(groups));
  }
  if (cig != ci / groups) {
    throw ShapeError("conv2d: kernel expects " + std::to_string(cig) +
                     " input channels per group, input provides " + std::to_string(ci / groups));
  }
  if (kh > h || kw > w) {
    throw ShapeError("conv2d: kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                     " larger than input " + std::to_string(h) + "x" + std::to_string(w));
  }
  if (b != nullptr && (b->shape().size() != 1 || b->shape()[0] != co)) {
    throw ShapeError("conv2d: bias must be [" + std::to_string(co) + "], got " +
                     shape_str(b->shape()));
  }
  const std::size_t ho = (h - kh) / stride + 1, wo = (w - kw) / stride + 1;
  const std::size_t cog = co / groups, kc = cig * kh * kw, p = ho * wo;

  // im2col per group: rows (c, i, j), columns output positions.
  auto cols = std::make_shared<std::vector<double>>(groups * kc * p);
  const auto& xv = x.values();
  for (std::size_t g = 0; g < groups; ++g) {
    double* col = cols->data() + g * kc * p;
    for (std::size_t c = 0; c < cig; ++c) {
      const double* plane = xv.data() + (g * cig + c) * h * w;
      for (std::size_t i = 0; i < kh; ++i) {
        for (std::size_t j = 0; j < kw; ++j) {
          double* dst = col + ((c * kh + i) * kw + j) * p;
          for (std::size_t oy = 0; oy < ho; ++oy) {
            const double* src = plane + (oy * stride + i) * w + j;
            for (std::size_t ox = 0; ox < wo; ++ox) dst[oy * wo + ox] = src[ox * stride];
          }
        }
      }
    }
  }

  Tensor out({co, ho, wo});
  const auto& kv = k.values();
  for (std::size_t g = 0; g < groups; ++g) {
    store(out.values.data() + g * cog * p,
          owned(kv.data() + g * cog * kc, cog, kc) * owned(cols->data() + g * kc * p, kc, p));
  }
  if (b != nullptr) {
    const auto& bv = b->values();
    for (std::size_t c = 0; c < co; ++c) {
      for (std::size_t q = 0; q < p; ++q) out.values[c * p + q] += bv[c];
    }
  }

  std::vector<Var> parents{x, k};
  Var bias = b != nullptr ? *b : Var{};
  if (b != nullptr) parents.push_back(*b);
  return graph_of(x).record(
      std::move(out), parents,
      [=](const Tensor& o) {
        for (std::size_t g = 0; g < groups; ++g) {
          const RowMat dout = owned(o.grad.data() + g * cog * p, cog, p);
          if (k.requires_grad()) {
            accumulate(grad_of(k).data() + g * cog * kc,
                       dout * owned(cols->data() + g * kc * p, kc, p).transpose());
          }
          if (x.requires_grad()) {
            const RowMat dcol = owned(k.values().data() + g * cog * kc, cog, kc).transpose() * dout;
            auto& dx = grad_of(x);
            for (std::size_t c = 0; c < cig; ++c) {
              double* plane = dx.data() + (g * cig + c) * h * w;
              for (std::size_t i = 0; i < kh; ++i) {
                for (std::size_t j = 0; j < kw; ++j) {
                  const double* src = dcol.data() + ((c * kh + i) * kw + j) * p;
                  for (std::size_t oy = 0; oy < ho; ++oy) {
                    double* dst = plane + (oy * stride + i) * w + j;
                    for (std::size_t ox = 0; ox < wo; ++ox) dst[ox * stride] += src[oy * wo + ox];
                  }
                }
              }
            }
          }
        }
        if (bias.valid() && bias.requires_grad()) {
          auto& db = grad_of(bias);
          for (std::size_t c = 0; c < co; ++c) {
            double s = 0.0;
            for (std::size_t q = 0; q < p; ++q) s += o.grad[c * p + q];
            db[c] += s;
          }
        }
      });
}

Var linear_impl(const Var& x, const Var& w, const Var* b, std::size_t rows, std::size_t n,
                Shape out_shape) {
  if (w.shape().size() != 2 || w.shape()[1] != n) {
    throw ShapeError("linear: weight " + shape_str(w.shape()) + " not conformable with input " +
                     shape_str(x.shape()));
  }
  const std::size_t m = w.shape()[0];
  if (b != nullptr && (b->shape().size() != 1 || b->shape()[0] != m)) {
    throw ShapeError("linear: bias must be [" + std::to_string(m) + "], got " +
                     shape_str(b->shape()));
  }
  Tensor out(std::move(out_shape));
  {
    store(out.values.data(),
          owned(x.values().data(), rows, n) * owned(w.values().data(), m, n).transpose());
    MatMap om(out.values.data(), rows, m);
    if (b != nullptr) {
      Eigen::Map<const Eigen::RowVectorXd> bm(b->values().data(), m);
      om.rowwise() += bm;
    }
  }
  std::vector<Var> parents{x, w};
  Var bias = b != nullptr ? *b : Var{};
  if (b != nullptr) parents.push_back(*b);
  return graph_of(x).record(std::move(out), parents, [=](const Tensor& o) {
    const RowMat dout = owned(o.grad.data(), rows, m);
    if (x.requires_grad()) {
      accumulate(grad_of(x).data(), dout * owned(w.values().data(), m, n));
    }
    if (w.requires_grad()) {
      accumulate(grad_of(w).data(), dout.transpose() * owned(x.values().data(), rows, n));
    }
    if (bias.valid() && bias.requires_grad()) {
      auto& db = grad_of(bias);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < m; ++c) db[c] += dout.data()[r * m + c];
    }
  });
}

}  // namespace

Var conv2d(const Var& input, const Var& kernels, std::size_t stride, std::size_t groups) {
  return conv2d_impl(input, kernels, nullptr, stride, groups);
}

Var conv2d(const Var& input, const Var& kernels, const Var& bias, std::size_t stride,
           std::size_t groups) {
  return conv2d_impl(input, kernels, &bias, stride, groups);
}

Var maxpool2d(const Var& x, std::size_t k) {
  require_rank(x, 3, "maxpool2d", "input");
  if (k == 0) throw ConfigError("maxpool2d: window must be positive");
  const std::size_t c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
  if (h % k != 0 || w % k != 0) {
    throw ShapeError("maxpool2d: extent " + std::to_string(h) + "x" + std::to_string(w) +
                     " not divisible by window " + std::to_string(k));
  }
  const std::size_t ho = h / k, wo = w / k;
  Tensor out({c, ho, wo});
  auto argmax = std::make_shared<std::vector<std::size_t>>(out.size());
  const auto& xv = x.values();
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t oy = 0; oy < ho; ++oy) {
      for (std::size_t ox = 0; ox < wo; ++ox) {
        std::size_t best = (ch * h + oy * k) * w + ox * k;
        for (std::size_t i = 0; i < k; ++i) {
          for (std::size_t j = 0; j < k; ++j) {
            const std::size_t idx = (ch * h + oy * k + i) * w + ox * k + j;
            if (xv[idx] > xv[best]) best = idx;
          }
        }
        const std::size_t o = (ch * ho + oy) * wo + ox;
        out.values[o] = xv[best];
        (*argmax)[o] = best;
      }
    }
  }
  return graph_of(x).record(std::move(out), {x}, [x, argmax](const Tensor& o) {
    auto& g = grad_of(x);
    for (std::size_t i = 0; i < o.grad.size(); ++i) g[(*argmax)[i]] += o.grad[i];
  });
}

Var global_avg_pool(const Var& x) {
  require_rank(x, 3, "global_avg_pool", "input");
  const std::size_t c = x.shape()[0], p = x.shape()[1] * x.shape()[2];
  Tensor out({c});
  for (std::size_t ch = 0; ch < c; ++ch) {
    double s = 0.0;
    for (std::size_t q = 0; q < p; ++q) s += x.values()[ch * p + q];
    out.values[ch] = s / static_cast<double>(p);
  }
  return graph_of(x).record(std::move(out), {x}, [x, c, p](const Tensor& o) {
    auto& g = grad_of(x);
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double d = o.grad[ch] / static_cast<double>(p);
      for (std::size_t q = 0; q < p; ++q) g[ch * p + q] += d;
    }
  });
}

Var crop2d(const Var& x, std::size_t top, std::size_t left, std::size_t h, std::size_t w) {
  require_rank(x, 3, "crop2d", "input");
  const std::size_t c = x.shape()[0], ih = x.shape()[1], iw = x.shape()[2];
  if (h == 0 || w == 0 || top + h > ih || left + w > iw) {
    throw ShapeError("crop2d: window out of bounds for " + shape_str(x.shape()));
  }
  Tensor out({c, h, w});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j)
        out.values[(ch * h + i) * w + j] = x.values()[(ch * ih + top + i) * iw + left + j];
  return graph_of(x).record(std::move(out), {x}, [=](const Tensor& o) {
    auto& g = grad_of(x);
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j)
          g[(ch * ih + top + i) * iw + left + j] += o.grad[(ch * h + i) * w + j];
  });
}

Var relu(const Var& x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(const Var& x) {
  return unary(
      x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(const Var& x) {
  return unary(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = a.values()[i] + b.values()[i];
  return graph_of(a).record(std::move(out), {a, b}, [a, b](const Tensor& o) {
    if (a.requires_grad()) {
      auto& g = grad_of(a);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
    }
    if (b.requires_grad()) {
      auto& g = grad_of(b);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a, b, "mul");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = a.values()[i] * b.values()[i];
  return graph_of(a).record(std::move(out), {a, b}, [a, b](const Tensor& o) {
    if (a.requires_grad()) {
      auto& g = grad_of(a);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * b.values()[i];
    }
    if (b.requires_grad()) {
      auto& g = grad_of(b);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * a.values()[i];
    }
  });
}

Var scale(const Var& x, double s) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = x.values()[i] * s;
  return graph_of(x).record(std::move(out), {x}, [x, s](const Tensor& o) {
    auto& g = grad_of(x);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * s;
  });
}

Var reshape(const Var& x, Shape shape) {
  if (numel(shape) != x.size()) {
    throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  }
  Tensor out(std::move(shape), x.values());
  return graph_of(x).record(std::move(out), {x}, [x](const Tensor& o) {
    auto& g = grad_of(x);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
  });
}

Var dense(const Var& input, const Var& weight, const Var& bias) {
  require_rank(input, 1, "dense", "input");
  const std::size_t n = input.shape()[0];
  const std::size_t m = weight.shape().empty() ? 0 : weight.shape()[0];
  return linear_impl(input, weight, &bias, 1, n, {m});
}

Var dense(const Var& input, const Var& weight) {
  require_rank(input, 1, "dense", "input");
  const std::size_t n = input.shape()[0];
  const std::size_t m = weight.shape().empty() ? 0 : weight.shape()[0];
  return linear_impl(input, weight, nullptr, 1, n, {m});
}

Var linear(const Var& input, const Var& weight, const Var& bias) {
  require_rank(input, 2, "linear", "input");
  const std::size_t m = weight.shape().empty() ? 0 : weight.shape()[0];
  return linear_impl(input, weight, &bias, input.shape()[0], input.shape()[1],
                     {input.shape()[0], m});
}

Var linear(const Var& input, const Var& weight) {
  require_rank(input, 2, "linear", "input");
  const std::size_t m = weight.shape().empty() ? 0 : weight.shape()[0];
  return linear_impl(input, weight, nullptr, input.shape()[0], input.shape()[1],
                     {input.shape()[0], m});
}

Var matmul(const Var& a, const Var& b) {
  require_rank(a, 2, "matmul", "lhs");
  require_rank(b, 2, "matmul", "rhs");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw ShapeError("matmul: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  Tensor out({m, n});
  store(out.values.data(), owned(a.values().data(), m, k) * owned(b.values().data(), k, n));
  return graph_of(a).record(std::move(out), {a, b}, [=](const Tensor& o) {
    const RowMat dout = owned(o.grad.data(), m, n);
    if (a.requires_grad()) {
      accumulate(grad_of(a).data(), dout * owned(b.values().data(), k, n).transpose());
    }
    if (b.requires_grad()) {
      accumulate(grad_of(b).data(), owned(a.values().data(), m, k).transpose() * dout);
    }
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  require_rank(a, 2, "matmul_nt", "lhs");
  require_rank(b, 2, "matmul_nt", "rhs");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[0];
  if (b.shape()[1] != k) {
    throw ShapeError("matmul_nt: " + shape_str(a.shape()) + " x " + shape_str(b.shape()) + "^T");
  }
  Tensor out({m, n});
  store(out.values.data(),
        owned(a.values().data(), m, k) * owned(b.values().data(), n, k).transpose());
  return graph_of(a).record(std::move(out), {a, b}, [=](const Tensor& o) {
    const RowMat dout = owned(o.grad.data(), m, n);
    if (a.requires_grad()) {
      accumulate(grad_of(a).data(), dout * owned(b.values().data(), n, k));
    }
    if (b.requires_grad()) {
      accumulate(grad_of(b).data(), dout.transpose() * owned(a.values().data(), m, k));
    }
  });
}

Var softmax_rows(const Var& x, const std::vector<bool>& key_valid) {
  require_rank(x, 2, "softmax_rows", "input");
  const std::size_t r = x.shape()[0], c = x.shape()[1];
  if (!key_valid.empty() && key_valid.size() != c) {
    throw ShapeError("softmax_rows: mask width " + std::to_string(key_valid.size()) +
                     " != " + std::to_string(c));
  }
  const bool masked = !key_valid.empty();
  if (masked && std::none_of(key_valid.begin(), key_valid.end(), [](bool b) { return b; })) {
    throw ContractError("softmax_rows: every column is masked");
  }
  Tensor out({r, c});
  const auto& xv = x.values();
  for (std::size_t i = 0; i < r; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c; ++j)
      if (!masked || key_valid[j]) mx = std::max(mx, xv[i * c + j]);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double e = (!masked || key_valid[j]) ? std::exp(xv[i * c + j] - mx) : 0.0;
      out.values[i * c + j] = e;
      z += e;
    }
    for (std::size_t j = 0; j < c; ++j) out.values[i * c + j] /= z;
  }
  return graph_of(x).record(std::move(out), {x}, [x, r, c](const Tensor& o) {
    auto& g = grad_of(x);
    for (std::size_t i = 0; i < r; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += o.values[i * c + j] * o.grad[i * c + j];
      for (std::size_t j = 0; j < c; ++j)
        g[i * c + j] += o.values[i * c + j] * (o.grad[i * c + j] - dot);
    }
  });
}

Var slice(const Var& x, std::size_t axis, std::size_t begin, std::size_t end) {
  const Shape& s = x.shape();
  if (axis >= s.size()) throw ShapeError("slice: axis out of range for " + shape_str(s));
  if (begin >= end || end > s[axis]) {
    throw ShapeError("slice: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") invalid for axis extent " + std::to_string(s[axis]));
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  const std::size_t len = end - begin, full = s[axis];
  Shape os = s;
  os[axis] = len;
  Tensor out(os);
  for (std::size_t o = 0; o < outer; ++o)
    std::copy_n(x.values().begin() + static_cast<long>((o * full + begin) * inner), len * inner,
                out.values.begin() + static_cast<long>(o * len * inner));
  return graph_of(x).record(std::move(out), {x}, [=](const Tensor& t) {
    auto& g = grad_of(x);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t q = 0; q < len * inner; ++q)
        g[(o * full + begin) * inner + q] += t.grad[o * len * inner + q];
  });
}

Var row(const Var& x, std::size_t i) {
  require_rank(x, 2, "row", "input");
  return reshape(slice(x, 0, i, i + 1), {x.shape()[1]});
}

Var concat(const std::vector<Var>& parts, std::size_t axis) {
  if (parts.empty()) throw ContractError("concat: no inputs");
  const Shape& s0 = parts[0].shape();
  if (axis >= s0.size()) throw ShapeError("concat: axis out of range for " + shape_str(s0));
  std::size_t total = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == s0.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = (i == axis) || s[i] == s0[i];
    if (!ok) throw ShapeError("concat: " + shape_str(s) + " incompatible with " + shape_str(s0));
    total += s[axis];
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s0[i];
  for (std::size_t i = axis + 1; i < s0.size(); ++i) inner *= s0[i];
  Shape os = s0;
  os[axis] = total;
  Tensor out(os);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t len = p.shape()[axis];
    for (std::size_t o = 0; o < outer; ++o)
      std::copy_n(p.values().begin() + static_cast<long>(o * len * inner), len * inner,
                  out.values.begin() + static_cast<long>((o * total + offset) * inner));
    offset += len;
  }
  return graph_of(parts[0]).record(std::move(out), parts, [=](const Tensor& t) {
    std::size_t off = 0;
    for (const auto& p : parts) {
      const std::size_t len = p.shape()[axis];
      if (p.requires_grad()) {
        auto& g = grad_of(p);
        for (std::size_t o = 0; o < outer; ++o)
          for (std::size_t q = 0; q < len * inner; ++q)
            g[o * len * inner + q] += t.grad[(o * total + off) * inner + q];
      }
      off += len;
    }
  });
}

Var stack_rows(const std::vector<Var>& rows) {
  if (rows.empty()) throw ContractError("stack_rows: no inputs");
  const std::size_t d = rows[0].size();
  for (const auto& r : rows) {
    if (r.shape().size() != 1 || r.size() != d) {
      throw ShapeError("stack_rows: expected [" + std::to_string(d) + "], got " +
                       shape_str(r.shape()));
    }
  }
  Tensor out({rows.size(), d});
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy(rows[i].values().begin(), rows[i].values().end(),
              out.values.begin() + static_cast<long>(i * d));
  return graph_of(rows[0]).record(std::move(out), rows, [rows, d](const Tensor& t) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i].requires_grad()) continue;
      auto& g = grad_of(rows[i]);
      for (std::size_t q = 0; q < d; ++q) g[q] += t.grad[i * d + q];
    }
  });
}

Var shift_rows(const Var& x, long offset) {
  require_rank(x, 2, "shift_rows", "input");
  const long n = static_cast<long>(x.shape()[0]);
  const std::size_t d = x.shape()[1];
  Tensor out(x.shape());
  for (long i = 0; i < n; ++i) {
    const long src = i - offset;
    if (src < 0 || src >= n) continue;
    std::copy_n(x.values().begin() + src * static_cast<long>(d), d,
                out.values.begin() + i * static_cast<long>(d));
  }
  return graph_of(x).record(std::move(out), {x}, [x, n, d, offset](const Tensor& t) {
    auto& g = grad_of(x);
    for (long i = 0; i < n; ++i) {
      const long src = i - offset;
      if (src < 0 || src >= n) continue;
      for (std::size_t q = 0; q < d; ++q)
        g[static_cast<std::size_t>(src) * d + q] += t.grad[static_cast<std::size_t>(i) * d + q];
    }
  });
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  const std::size_t d = x.shape().back();
  if (gamma.shape() != Shape{d} || beta.shape() != Shape{d}) {
    throw ShapeError("layer_norm: gamma/beta must be [" + std::to_string(d) + "]");
  }
  const std::size_t rows = x.size() / d;
  Tensor out(x.shape());
  auto xhat = std::make_shared<std::vector<double>>(x.size());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  const auto& xv = x.values();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = xv.data() + r * d;
    double mu = 0.0;
    for (std::size_t q = 0; q < d; ++q) mu += xr[q];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t q = 0; q < d; ++q) var += (xr[q] - mu) * (xr[q] - mu);
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = is;
    for (std::size_t q = 0; q < d; ++q) {
      const double h = (xr[q] - mu) * is;
      (*xhat)[r * d + q] = h;
      out.values[r * d + q] = h * gamma.values()[q] + beta.values()[q];
    }
  }
  return graph_of(x).record(std::move(out), {x, gamma, beta}, [=](const Tensor& t) {
    for (std::size_t r = 0; r < rows; ++r) {
      const double* gr = t.grad.data() + r * d;
      const double* hr = xhat->data() + r * d;
      if (gamma.requires_grad()) {
        auto& gg = grad_of(gamma);
        for (std::size_t q = 0; q < d; ++q) gg[q] += gr[q] * hr[q];
      }
      if (beta.requires_grad()) {
        auto& gb = grad_of(beta);
        for (std::size_t q = 0; q < d; ++q) gb[q] += gr[q];
      }
      if (x.requires_grad()) {
        double mean_dh = 0.0, mean_dh_h = 0.0;
        for (std::size_t q = 0; q < d; ++q) {
          const double dh = gr[q] * gamma.values()[q];
          mean_dh += dh;
          mean_dh_h += dh * hr[q];
        }
        mean_dh /= static_cast<double>(d);
        mean_dh_h /= static_cast<double>(d);
        auto& gx = grad_of(x);
        for (std::size_t q = 0; q < d; ++q) {
          const double dh = gr[q] * gamma.values()[q];
          gx[r * d + q] += (*inv_std)[r] * (dh - mean_dh - hr[q] * mean_dh_h);
        }
      }
    }
  });
}

Var embedding(const Var& table, const std::vector<std::size_t>& ids) {
  require_rank(table, 2, "embedding", "table");
  if (ids.empty()) throw ContractError("embedding: empty id list");
  const std::size_t v = table.shape()[0], d = table.shape()[1];
  Tensor out({ids.size(), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= v) {
      throw IndexError("embedding: id " + std::to_string(ids[i]) + " outside table of " +
                       std::to_string(v));
    }
    std::copy_n(table.values().begin() + static_cast<long>(ids[i] * d), d,
                out.values.begin() + static_cast<long>(i * d));
  }
  return graph_of(table).record(std::move(out), {table}, [table, ids, d](const Tensor& t) {
    auto& g = grad_of(table);
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t q = 0; q < d; ++q) g[ids[i] * d + q] += t.grad[i * d + q];
  });
}

Var softmax_cross_entropy(const Var& logits, std::size_t target) {
  require_rank(logits, 1, "softmax_cross_entropy", "logits");
  const std::size_t k = logits.size();
  if (target >= k) {
    throw IndexError("softmax_cross_entropy: target " + std::to_string(target) +
                     " outside [0," + std::to_string(k) + ")");
  }
  const auto& lv = logits.values();
  const double mx = *std::max_element(lv.begin(), lv.end());
  auto probs = std::make_shared<std::vector<double>>(k);
  double z = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    (*probs)[i] = std::exp(lv[i] - mx);
    z += (*probs)[i];
  }
  for (auto& p : *probs) p /= z;
  const double loss = mx + std::log(z) - lv[target];
  return graph_of(logits).record(Tensor::scalar(loss), {logits},
                                 [logits, probs, target](const Tensor& t) {
                                   auto& g = grad_of(logits);
                                   const double up = t.grad[0];
                                   for (std::size_t i = 0; i < g.size(); ++i)
                                     g[i] += up * ((*probs)[i] - (i == target ? 1.0 : 0.0));
                                 });
}

Var sum(const std::vector<Var>& xs) {
  if (xs.empty()) throw ContractError("sum: no inputs");
  for (const auto& v : xs) require_same_shape(v, xs[0], "sum");
  Tensor out(xs[0].shape());
  for (const auto& v : xs)
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += v.values()[i];
  return graph_of(xs[0]).record(std::move(out), xs, [xs](const Tensor& t) {
    for (const auto& v : xs) {
      if (!v.requires_grad()) continue;
      auto& g = grad_of(v);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += t.grad[i];
    }
  });
}

Var mean(const std::vector<Var>& xs) {
  if (xs.empty()) throw ContractError("mean: no inputs");
  return scale(sum(xs), 1.0 / static_cast<double>(xs.size()));
}

}  // namespace glyce::ad
