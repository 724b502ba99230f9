// Copyright 2026 The DRVC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DRVC_TENSOR_HPP
#define DRVC_TENSOR_HPP

#include <cstdint>
#include <initializer_list>
#include <vector>

#include "drvc/common.hpp"

namespace drvc {

// Dense row-major tensor of doubles. Double precision keeps finite-difference
// gradient checks and bit-exact checkpoint resume within reach on CPU.
struct Tensor {
  std::vector<int64_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int64_t> s) : shape(std::move(s)) {
    data.assign(static_cast<size_t>(numel_of(shape)), 0.0);
  }
  Tensor(std::vector<int64_t> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (static_cast<int64_t>(data.size()) != numel_of(shape))
      throw ContractError("tensor: data size does not match shape");
  }

  static int64_t numel_of(const std::vector<int64_t>& s) {
    int64_t n = 1;
    for (int64_t d : s) n *= d;
    return n;
  }

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int64_t dim(int i) const { return shape[static_cast<size_t>(i)]; }

  // 2-D accessors
  int64_t rows() const { return shape[0]; }
  int64_t cols() const { return shape[1]; }
  double& at(int64_t i, int64_t j) { return data[static_cast<size_t>(i * cols() + j)]; }
  double at(int64_t i, int64_t j) const { return data[static_cast<size_t>(i * cols() + j)]; }

  // 3-D accessor [B, T, C]
  double& at(int64_t b, int64_t t, int64_t c) {
    return data[static_cast<size_t>((b * shape[1] + t) * shape[2] + c)];
  }
  double at(int64_t b, int64_t t, int64_t c) const {
    return data[static_cast<size_t>((b * shape[1] + t) * shape[2] + c)];
  }

  static Tensor zeros(std::vector<int64_t> s) { return Tensor(std::move(s)); }
  static Tensor full(std::vector<int64_t> s, double v) {
    Tensor t(std::move(s));
    for (auto& x : t.data) x = v;
    return t;
  }
  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool all_finite() const;
};

// Deterministic matmul kernels. Each output element is accumulated by exactly
// one thread in fixed k-order, so results are identical for any thread count.
// C[M,N] = A[M,K] * B[K,N]
void matmul_nn(const double* a, const double* b, double* c, int64_t m, int64_t k, int64_t n);
// C[M,K] = A[M,N] * B[K,N]^T
void matmul_nt(const double* a, const double* b, double* c, int64_t m, int64_t n, int64_t k);
// C[K,N] = A[M,K]^T * B[M,N]
void matmul_tn(const double* a, const double* b, double* c, int64_t m, int64_t k, int64_t n);

}  // namespace drvc

#endif  // DRVC_TENSOR_HPP
