// Copyright 2026 The Velo Authors
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

#ifndef VELO_GRAPH_HPP_
#define VELO_GRAPH_HPP_

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "velo/errors.hpp"
#include "velo/tensor.hpp"

namespace velo {

// Additive attention-mask value. exp() of it underflows to exactly zero in
// both float and double, so masked positions contribute nothing.
template <typename S>
constexpr S kMaskNeg = S(-1e9);

// Reverse-mode tape. Nodes are created in topological order by the op
// builders below; backward() walks the tape in reverse. Values and grads
// are dense matrices. Ops that do not involve a grad-requiring input skip
// gradient propagation entirely.
template <typename S>
class Graph {
 public:
  struct Node {
    Tensor<S> value;
    Tensor<S> grad;       // allocated lazily, same shape as value
    bool needs_grad = false;
    std::function<void(Graph&, int)> back;  // (graph, own id)
  };

  int size() const { return static_cast<int>(nodes_.size()); }
  const Tensor<S>& value(int id) const { return nodes_[id].value; }
  const Tensor<S>& grad(int id) const { return nodes_[id].grad; }
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }

  // Leaf with gradient tracking (parameters).
  int leaf(Tensor<S> v) {
    Node n;
    n.value = std::move(v);
    n.needs_grad = true;
    nodes_.push_back(std::move(n));
    return size() - 1;
  }

  // Leaf without gradient tracking (inputs, masks, position tables).
  int constant(Tensor<S> v) {
    Node n;
    n.value = std::move(v);
    nodes_.push_back(std::move(n));
    return size() - 1;
  }

  // y = a * b^T with b stored row-major as (N x K); a is (M x K).
  int matmul_nt(int a, int b) {
    const Tensor<S>& A = val(a);
    const Tensor<S>& B = val(b);
    check(A.cols == B.cols, "matmul_nt inner dims");
    Tensor<S> out(A.rows, B.rows);
    mm_nt_acc(A.data.data(), B.data.data(), out.data.data(), A.rows, A.cols, B.rows);
    return make(std::move(out), {a, b}, [a, b](Graph& g, int id) {
      const Tensor<S>& d = g.nodes_[id].grad;
      const Tensor<S>& A = g.val(a);
      const Tensor<S>& B = g.val(b);
      if (g.needs_grad(a)) {
        // dA += d * B
        mm_nn_acc(d.data.data(), B.data.data(), g.grad_buf(a).data.data(), d.rows,
                  d.cols, B.cols);
      }
      if (g.needs_grad(b)) {
        // dB += d^T * A
        mm_tn_acc(d.data.data(), A.data.data(), g.grad_buf(b).data.data(), d.rows,
                  d.cols, A.cols);
      }
    });
  }

  // y = a * b, a (M x K), b (K x N).
  int matmul(int a, int b) {
    const Tensor<S>& A = val(a);
    const Tensor<S>& B = val(b);
    check(A.cols == B.rows, "matmul inner dims");
    Tensor<S> out(A.rows, B.cols);
    mm_nn_acc(A.data.data(), B.data.data(), out.data.data(), A.rows, A.cols, B.cols);
    return make(std::move(out), {a, b}, [a, b](Graph& g, int id) {
      const Tensor<S>& d = g.nodes_[id].grad;
      const Tensor<S>& A = g.val(a);
      const Tensor<S>& B = g.val(b);
      if (g.needs_grad(a)) {
        // dA += d * B^T
        mm_nt_acc(d.data.data(), B.data.data(), g.grad_buf(a).data.data(), d.rows,
                  d.cols, B.rows);
      }
      if (g.needs_grad(b)) {
        // dB += A^T * d
        mm_tn_acc(A.data.data(), d.data.data(), g.grad_buf(b).data.data(), A.rows,
                  A.cols, d.cols);
      }
    });
  }

  int add(int a, int b) {
    const Tensor<S>& A = val(a);
    const Tensor<S>& B = val(b);
    check(A.same_shape(B), "add shape");
    Tensor<S> out = A;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += B.data[i];
    return make(std::move(out), {a, b}, [a, b](Graph& g, int id) {
      const Tensor<S>& d = g.nodes_[id].grad;
      for (int p : {a, b}) {
        if (!g.needs_grad(p)) continue;
        Tensor<S>& gp = g.grad_buf(p);
        for (size_t i = 0; i < d.data.size(); ++i) gp.data[i] += d.data[i];
      }
    });
  }

  // y = a + bias, bias (1 x C) broadcast over rows.
  int add_rowvec(int a, int bias) {
    const Tensor<S>& A = val(a);
    const Tensor<S>& B = val(bias);
    check(B.rows == 1 && B.cols == A.cols, "add_rowvec shape");
    Tensor<S> out = A;
    for (int r = 0; r < out.rows; ++r) {
      S* o = out.row(r);
      for (int c = 0; c < out.cols; ++c) o[c] += B.data[c];
    }
    return make(std::move(out), {a, bias}, [a, bias](Graph& g, int id) {
      const Tensor<S>& d = g.nodes_[id].grad;
      if (g.needs_grad(a)) {
        Tensor<S>& ga = g.grad_buf(a);
        for (size_t i = 0; i < d.data.size(); ++i) ga.data[i] += d.data[i];
      }
      if (g.needs_grad(bias)) {
        Tensor<S>& gb = g.grad_buf(bias);
        for (int r = 0; r < d.rows; ++r) {
          const S* dr = d.row(r);
          for (int c = 0; c < d.cols; ++c) gb.data[c] += dr[c];
        }
      }
    });
  }

  int scale(int a, S s) {
    Tensor<S> out = val(a);
    for (S& v : out.data) v *= s;
    return make(std::move(out), {a}, [a, s](Graph& g, int id) {
      if (!g.needs_grad(a)) return;
      const Tensor<S>& d = g.nodes_[id].grad;
      Tensor<S>& ga = g.grad_buf(a);
      for (size_t i = 0; i < d.data.size(); ++i) ga.data[i] += s * d.data[i];
    });
  }

  // Elementwise multiply by a fixed matrix (dropout masks).
  int mul_const(int a, Tensor<S> m) {
    const Tensor<S>& A = val(a);
    check(A.same_shape(m), "mul_const shape");
    Tensor<S> out = A;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= m.data[i];
    auto mask = std::make_shared<Tensor<S>>(std::move(m));
    return make(std::move(out), {a}, [a, mask](Graph& g, int id) {
      if (!g.needs_grad(a)) return;
      const Tensor<S>& d = g.nodes_[id].grad;
      Tensor<S>& ga = g.grad_buf(a);
      for (size_t i = 0; i < d.data.size(); ++i) ga.data[i] += mask->data[i] * d.data[i];
    });
  }

  // Add a fixed matrix (position tables, attention masks).
  int add_const(int a, Tensor<S> m) {
    const Tensor<S>& A = val(a);
    check(A.same_shape(m), "add_const shape");
    Tensor<S> out = A;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += m.data[i];
    return make(std::move(out), {a}, [a](Graph& g, int id) {
      if (!g.needs_grad(a)) return;
      const Tensor<S>& d = g.nodes_[id].grad;
      Tensor<S>& ga = g.grad_buf(a);
      for (size_t i = 0; i < d.data.size(); ++i) ga.data[i] += d.data[i];
    });
  }

  // Exact GELU: 0.5 x (1 + erf(x / sqrt(2))).
  int gelu(int a) {
    const Tensor<S>& A = val(a);
    Tensor<S> out(A.rows, A.cols);
    for (size_t i = 0; i < A.data.size(); ++i) {
      const S x = A.data[i];
      out.data[i] = S(0.5) * x * (S(1) + std::erf(x * S(M_SQRT1_2)));
    }
    return make(std::move(out), {a}, [a](Graph& g, int id) {
      if (!g.needs_grad(a)) return;
      const Tensor<S>& d = g.nodes_[id].grad;
      const Tensor<S>& A = g.val(a);
      Tensor<S>& ga = g.grad_buf(a);
      constexpr S inv_sqrt2pi = S(0.3989422804014326779);
      for (size_t i = 0; i < d.data.size(); ++i) {
        const S x = A.data[i];
        const S cdf = S(0.5) * (S(1) + std::erf(x * S(M_SQRT1_2)));
        const S pdf = inv_sqrt2pi * std::exp(S(-0.5) * x * x);
        ga.data[i] += d.data[i] * (cdf + x * pdf);
      }
    });
  }

  // Per-row layer norm with learned gain and bias (both 1 x C).
  int layer_norm(int x, int gain, int bias, S eps = S(1e-5)) {
    const Tensor<S>& X = val(x);
    const Tensor<S>& G = val(gain);
    const Tensor<S>& B = val(bias);
    check(G.rows == 1 && G.cols == X.cols && B.rows == 1 && B.cols == X.cols,
          "layer_norm shape");
    const int C = X.cols;
    Tensor<S> out(X.rows, C);
    for (int r = 0; r < X.rows; ++r) {
      const S* xr = X.row(r);
      S mu = S(0);
      for (int c = 0; c < C; ++c) mu += xr[c];
      mu /= S(C);
      S var = S(0);
      for (int c = 0; c < C; ++c) {
        const S dv = xr[c] - mu;
        var += dv * dv;
      }
      var /= S(C);
      const S inv = S(1) / std::sqrt(var + eps);
      S* o = out.row(r);
      for (int c = 0; c < C; ++c) o[c] = G.data[c] * ((xr[c] - mu) * inv) + B.data[c];
    }
    return make(std::move(out), {x, gain, bias},
                [x, gain, bias, eps](Graph& g, int id) {
      const Tensor<S>& d = g.nodes_[id].grad;
      const Tensor<S>& X = g.val(x);
      const Tensor<S>& G = g.val(gain);
      const int C = X.cols;
      for (int r = 0; r < X.rows; ++r) {
        const S* xr = X.row(r);
        const S* dr = d.row(r);
        S mu = S(0);
        for (int c = 0; c < C; ++c) mu += xr[c];
        mu /= S(C);
        S var = S(0);
        for (int c = 0; c < C; ++c) {
          const S dv = xr[c] - mu;
          var += dv * dv;
        }
        var /= S(C);
        const S inv = S(1) / std::sqrt(var + eps);
        if (g.needs_grad(gain)) {
          Tensor<S>& gg = g.grad_buf(gain);
          for (int c = 0; c < C; ++c) gg.data[c] += dr[c] * ((xr[c] - mu) * inv);
        }
        if (g.needs_grad(bias)) {
          Tensor<S>& gb = g.grad_buf(bias);
          for (int c = 0; c < C; ++c) gb.data[c] += dr[c];
        }
        if (g.needs_grad(x)) {
          // dxhat = d .* gain; dx = inv*(dxhat - mean(dxhat) - xhat*mean(dxhat.*xhat))
          S mean_dh = S(0), mean_dh_xh = S(0);
          for (int c = 0; c < C; ++c) {
            const S xh = (xr[c] - mu) * inv;
            const S dh = dr[c] * G.data[c];
            mean_dh += dh;
            mean_dh_xh += dh * xh;
          }
          mean_dh /= S(C);
          mean_dh_xh /= S(C);
          Tensor<S>& gx = g.grad_buf(x);
          S* gxr = gx.row(r);
          for (int c = 0; c < C; ++c) {
            const S xh = (xr[c] - mu) * inv;
            const S dh = dr[c] * G.data[c];
            gxr[c] += inv * (dh - mean_dh - xh * mean_dh_xh);
          }
        }
      }
    });
  }

  int softmax_rows(int a) {
    const Tensor<S>& A = val(a);
    Tensor<S> out(A.rows, A.cols);
    for (int r = 0; r < A.rows; ++r) {
      const S* x = A.row(r);
      S m = x[0];
      for (int c = 1; c < A.cols; ++c) m = std::max(m, x[c]);
      S z = S(0);
      S* o = out.row(r);
      for (int c = 0; c < A.cols; ++c) {
        o[c] = std::exp(x[c] - m);
        z += o[c];
      }
      const S invz = S(1) / z;
      for (int c = 0; c < A.cols; ++c) o[c] *= invz;
    }
    return make(std::move(out), {a}, [a](Graph& g, int id) {
      if (!g.needs_grad(a)) return;
      const Tensor<S>& y = g.nodes_[id].value;
      const Tensor<S>& d = g.nodes_[id].grad;
      Tensor<S>& ga = g.grad_buf(a);
      for (int r = 0; r < y.rows; ++r) {
        const S* yr = y.row(r);
        const S* dr = d.row(r);
        S dot = S(0);
        for (int c = 0; c < y.cols; ++c) dot += yr[c] * dr[c];
        S* gr = ga.row(r);
        for (int c = 0; c < y.cols; ++c) gr[c] += yr[c] * (dr[c] - dot);
      }
    });
  }

  int slice_cols(int a, int c0, int c1) {
    const Tensor<S>& A = val(a);
    check(0 <= c0 && c0 < c1 && c1 <= A.cols, "slice_cols range");
    Tensor<S> out(A.rows, c1 - c0);
    for (int r = 0; r < A.rows; ++r) {
      const S* src = A.row(r) + c0;
      S* dst = out.row(r);
      for (int c = 0; c < out.cols; ++c) dst[c] = src[c];
    }
    return make(std::move(out), {a}, [a, c0](Graph& g, int id) {
      if (!g.needs_grad(a)) return;
      const Tensor<S>& d = g.nodes_[id].grad;
      Tensor<S>& ga = g.grad_buf(a);
      for (int r = 0; r < d.rows; ++r) {
        const S* dr = d.row(r);
        S* gr = ga.row(r) + c0;
        for (int c = 0; c < d.cols; ++c) gr[c] += dr[c];
      }
    });
  }

  int slice_rows(int a, int r0, int r1) {
    const Tensor<S>& A = val(a);
    check(0 <= r0 && r0 < r1 && r1 <= A.rows, "slice_rows range");
    Tensor<S> out(r1 - r0, A.cols);
    for (int r = 0; r < out.rows; ++r) {
      const S* src = A.row(r0 + r);
      S* dst = out.row(r);
      for (int c = 0; c < out.cols; ++c) dst[c] = src[c];
    }
    return make(std::move(out), {a}, [a, r0](Graph& g, int id) {
      if (!g.needs_grad(a)) return;
      const Tensor<S>& d = g.nodes_[id].grad;
      Tensor<S>& ga = g.grad_buf(a);
      for (int r = 0; r < d.rows; ++r) {
        const S* dr = d.row(r);
        S* gr = ga.row(r0 + r);
        for (int c = 0; c < d.cols; ++c) gr[c] += dr[c];
      }
    });
  }

  int concat_cols(const std::vector<int>& parts) {
    check(!parts.empty(), "concat_cols empty");
    int rows = val(parts[0]).rows;
    int cols = 0;
    for (int p : parts) {
      check(val(p).rows == rows, "concat_cols rows");
      cols += val(p).cols;
    }
    Tensor<S> out(rows, cols);
    int off = 0;
    for (int p : parts) {
      const Tensor<S>& P = val(p);
      for (int r = 0; r < rows; ++r) {
        const S* src = P.row(r);
        S* dst = out.row(r) + off;
        for (int c = 0; c < P.cols; ++c) dst[c] = src[c];
      }
      off += P.cols;
    }
    auto ps = parts;
    return make(std::move(out), parts, [ps](Graph& g, int id) {
      const Tensor<S>& d = g.nodes_[id].grad;
      int off = 0;
      for (int p : ps) {
        const int pc = g.val(p).cols;
        if (g.needs_grad(p)) {
          Tensor<S>& gp = g.grad_buf(p);
          for (int r = 0; r < d.rows; ++r) {
            const S* dr = d.row(r) + off;
            S* gr = gp.row(r);
            for (int c = 0; c < pc; ++c) gr[c] += dr[c];
          }
        }
        off += pc;
      }
    });
  }

  // Row gather (embedding lookup). Duplicate indices accumulate gradient.
  int gather_rows(int table, std::vector<int> idx) {
    const Tensor<S>& T = val(table);
    for (int i : idx) check(0 <= i && i < T.rows, "gather_rows index");
    Tensor<S> out(static_cast<int>(idx.size()), T.cols);
    for (size_t r = 0; r < idx.size(); ++r) {
      const S* src = T.row(idx[r]);
      S* dst = out.row(static_cast<int>(r));
      for (int c = 0; c < T.cols; ++c) dst[c] = src[c];
    }
    auto ids = std::make_shared<std::vector<int>>(std::move(idx));
    return make(std::move(out), {table}, [table, ids](Graph& g, int id) {
      if (!g.needs_grad(table)) return;
      const Tensor<S>& d = g.nodes_[id].grad;
      Tensor<S>& gt = g.grad_buf(table);
      for (size_t r = 0; r < ids->size(); ++r) {
        const S* dr = d.row(static_cast<int>(r));
        S* gr = gt.row((*ids)[r]);
        for (int c = 0; c < d.cols; ++c) gr[c] += dr[c];
      }
    });
  }

  // Unfolds a (T x C) sequence into conv patches: output row t holds the
  // kernel-window [t*stride - pad, ...] flattened as K*C values. Out-of-range
  // taps are zero, matching zero-padded convolution.
  int im2col(int a, int kernel, int stride, int pad) {
    const Tensor<S>& A = val(a);
    const int T = A.rows, C = A.cols;
    const int T_out = (T + 2 * pad - kernel) / stride + 1;
    check(T_out >= 1, "im2col output length");
    Tensor<S> out(T_out, kernel * C);
    for (int t = 0; t < T_out; ++t) {
      S* dst = out.row(t);
      for (int k = 0; k < kernel; ++k) {
        const int src_r = t * stride - pad + k;
        if (src_r < 0 || src_r >= T) continue;
        const S* src = A.row(src_r);
        for (int c = 0; c < C; ++c) dst[k * C + c] = src[c];
      }
    }
    return make(std::move(out), {a}, [a, kernel, stride, pad](Graph& g, int id) {
      if (!g.needs_grad(a)) return;
      const Tensor<S>& d = g.nodes_[id].grad;
      Tensor<S>& ga = g.grad_buf(a);
      const int T = ga.rows, C = ga.cols;
      for (int t = 0; t < d.rows; ++t) {
        const S* dr = d.row(t);
        for (int k = 0; k < kernel; ++k) {
          const int src_r = t * stride - pad + k;
          if (src_r < 0 || src_r >= T) continue;
          S* gr = ga.row(src_r);
          for (int c = 0; c < C; ++c) gr[c] += dr[k * C + c];
        }
      }
    });
  }

  // Mean over the first n_valid rows -> (1 x C).
  int mean_rows(int a, int n_valid) {
    const Tensor<S>& A = val(a);
    check(n_valid >= 1 && n_valid <= A.rows, "mean_rows range");
    Tensor<S> out(1, A.cols);
    for (int r = 0; r < n_valid; ++r) {
      const S* src = A.row(r);
      for (int c = 0; c < A.cols; ++c) out.data[c] += src[c];
    }
    const S inv = S(1) / S(n_valid);
    for (S& v : out.data) v *= inv;
    return make(std::move(out), {a}, [a, n_valid, inv](Graph& g, int id) {
      if (!g.needs_grad(a)) return;
      const Tensor<S>& d = g.nodes_[id].grad;
      Tensor<S>& ga = g.grad_buf(a);
      for (int r = 0; r < n_valid; ++r) {
        S* gr = ga.row(r);
        for (int c = 0; c < d.cols; ++c) gr[c] += inv * d.data[c];
      }
    });
  }

  // Column-wise max over the first n_valid rows -> (1 x C). Gradient routes
  // to the first argmax row, matching the forward tie-break.
  int max_rows(int a, int n_valid) {
    const Tensor<S>& A = val(a);
    check(n_valid >= 1 && n_valid <= A.rows, "max_rows range");
    Tensor<S> out(1, A.cols);
    auto arg = std::make_shared<std::vector<int>>(A.cols, 0);
    for (int c = 0; c < A.cols; ++c) {
      S best = A.at(0, c);
      int bi = 0;
      for (int r = 1; r < n_valid; ++r) {
        if (A.at(r, c) > best) {
          best = A.at(r, c);
          bi = r;
        }
      }
      out.data[c] = best;
      (*arg)[c] = bi;
    }
    return make(std::move(out), {a}, [a, arg](Graph& g, int id) {
      if (!g.needs_grad(a)) return;
      const Tensor<S>& d = g.nodes_[id].grad;
      Tensor<S>& ga = g.grad_buf(a);
      for (int c = 0; c < d.cols; ++c) ga.at((*arg)[c], c) += d.data[c];
    });
  }

  // Summed token cross entropy: sum over rows r with row_weight[r] > 0 of
  // row_weight[r] * (logsumexp(logits[r]) - logits[r][target[r]]).
  // Output is 1x1. Weighted rows let the caller exclude PAD positions.
  int softmax_xent(int logits, std::vector<int> targets, std::vector<S> row_weight) {
    const Tensor<S>& L = val(logits);
    check(static_cast<int>(targets.size()) == L.rows, "softmax_xent targets");
    check(static_cast<int>(row_weight.size()) == L.rows, "softmax_xent weights");
    for (int r = 0; r < L.rows; ++r)
      if (row_weight[r] > S(0))
        check(0 <= targets[r] && targets[r] < L.cols, "softmax_xent target range");
    auto probs = std::make_shared<Tensor<S>>(L.rows, L.cols);
    Tensor<S> out(1, 1);
    S total = S(0);
    for (int r = 0; r < L.rows; ++r) {
      const S* x = L.row(r);
      S m = x[0];
      for (int c = 1; c < L.cols; ++c) m = std::max(m, x[c]);
      S z = S(0);
      S* p = probs->row(r);
      for (int c = 0; c < L.cols; ++c) {
        p[c] = std::exp(x[c] - m);
        z += p[c];
      }
      const S invz = S(1) / z;
      for (int c = 0; c < L.cols; ++c) p[c] *= invz;
      if (row_weight[r] > S(0)) {
        const S lse = m + std::log(z);
        total += row_weight[r] * (lse - x[targets[r]]);
      }
    }
    out.data[0] = total;
    auto tgt = std::make_shared<std::vector<int>>(std::move(targets));
    auto w = std::make_shared<std::vector<S>>(std::move(row_weight));
    return make(std::move(out), {logits}, [logits, probs, tgt, w](Graph& g, int id) {
      if (!g.needs_grad(logits)) return;
      const S up = g.nodes_[id].grad.data[0];
      Tensor<S>& gl = g.grad_buf(logits);
      for (int r = 0; r < gl.rows; ++r) {
        const S wr = (*w)[r];
        if (wr <= S(0)) continue;
        const S* p = probs->row(r);
        S* gr = gl.row(r);
        for (int c = 0; c < gl.cols; ++c) gr[c] += up * wr * p[c];
        gr[(*tgt)[r]] -= up * wr;
      }
    });
  }

  // Seeds the root gradient and propagates through the tape in reverse.
  void backward(int root, S upstream = S(1)) {
    check(val(root).size() == 1, "backward root must be scalar");
    for (auto& n : nodes_) {
      if (n.needs_grad && n.grad.size() != n.value.size())
        n.grad = Tensor<S>(n.value.rows, n.value.cols);
    }
    nodes_[root].grad.data[0] = upstream;
    for (int id = root; id >= 0; --id) {
      Node& n = nodes_[id];
      if (n.back && n.needs_grad) n.back(*this, id);
    }
  }

 private:
  const Tensor<S>& val(int id) const { return nodes_[id].value; }
  Tensor<S>& grad_buf(int id) { return nodes_[id].grad; }

  static void check(bool ok, const char* what) {
    if (!ok) throw ShapeMismatch(std::string("graph op: ") + what);
  }

  int make(Tensor<S> out, const std::vector<int>& parents,
           std::function<void(Graph&, int)> back) {
    Node n;
    n.value = std::move(out);
    for (int p : parents) {
      if (nodes_[p].needs_grad) {
        n.needs_grad = true;
        break;
      }
    }
    if (n.needs_grad) n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return size() - 1;
  }

  std::vector<Node> nodes_;
};

}  // namespace velo

#endif  // VELO_GRAPH_HPP_
