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

#ifndef VELO_TENSOR_HPP_
#define VELO_TENSOR_HPP_

#include <algorithm>
#include <cstddef>
#include <vector>

#include "velo/errors.hpp"

namespace velo {

// Dense row-major matrix. Vectors are 1xN rows. The scalar type is a
// template parameter: float for training and inference, double for the
// finite-difference gradient checks.
template <typename S>
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<S> data;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, S(0)) {}
  Tensor(int r, int c, S fill)
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  size_t size() const { return data.size(); }
  S* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
  const S* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }
  S& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  S at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

  void fill(S v) { std::fill(data.begin(), data.end(), v); }

  template <typename T>
  Tensor<T> cast() const {
    Tensor<T> out(rows, cols);
    for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<T>(data[i]);
    return out;
  }
};

// C(MxN) += A(MxK) * B(KxN)
template <typename S>
void mm_nn_acc(const S* a, const S* b, S* c, int M, int K, int N) {
  for (int i = 0; i < M; ++i) {
    const S* ai = a + static_cast<size_t>(i) * K;
    S* ci = c + static_cast<size_t>(i) * N;
    for (int k = 0; k < K; ++k) {
      const S av = ai[k];
      const S* bk = b + static_cast<size_t>(k) * N;
      for (int j = 0; j < N; ++j) ci[j] += av * bk[j];
    }
  }
}

// C(MxN) += A(MxK) * B(NxK)^T
template <typename S>
void mm_nt_acc(const S* a, const S* b, S* c, int M, int K, int N) {
  for (int i = 0; i < M; ++i) {
    const S* ai = a + static_cast<size_t>(i) * K;
    S* ci = c + static_cast<size_t>(i) * N;
    for (int j = 0; j < N; ++j) {
      const S* bj = b + static_cast<size_t>(j) * K;
      S acc = S(0);
      for (int k = 0; k < K; ++k) acc += ai[k] * bj[k];
      ci[j] += acc;
    }
  }
}

// C(KxN) += A(MxK)^T * B(MxN)
template <typename S>
void mm_tn_acc(const S* a, const S* b, S* c, int M, int K, int N) {
  for (int i = 0; i < M; ++i) {
    const S* ai = a + static_cast<size_t>(i) * K;
    const S* bi = b + static_cast<size_t>(i) * N;
    for (int k = 0; k < K; ++k) {
      const S av = ai[k];
      S* ck = c + static_cast<size_t>(k) * N;
      for (int j = 0; j < N; ++j) ck[j] += av * bi[j];
    }
  }
}

}  // namespace velo

#endif  // VELO_TENSOR_HPP_
