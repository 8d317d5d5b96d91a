// Copyright 2026 The VortexSeg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vortexseg/graph.hpp"
#include "vortexseg/tensor.hpp"

// Differentiable building blocks with hand-written backward passes. Every
// backward accumulates (+=) into parameter gradients and overwrites input
// gradients. Instantiated for float (training) and double (gradient checks).
namespace vortexseg::nn {

inline constexpr double kLeakySlope = 0.2;

// y = x W + b with x: n x d_in, W: d_in x d_out, b: d_out.
template <typename T>
Matrix<T> linear_forward(const Matrix<T>& x, const Matrix<T>& w, std::span<const T> b);

template <typename T>
void linear_backward(const Matrix<T>& x, const Matrix<T>& w, const Matrix<T>& dy, Matrix<T>* dx,
                     Matrix<T>& dw, std::span<T> db);

// y_i = [local_i | global] W + b, i.e. a linear layer over per-point features
// concatenated with one feature vector shared by all points. W has
// local.cols + global.size() rows.
template <typename T>
Matrix<T> broadcast_linear_forward(const Matrix<T>& local, std::span<const T> global, const Matrix<T>& w,
                                   std::span<const T> b);

template <typename T>
void broadcast_linear_backward(const Matrix<T>& local, std::span<const T> global, const Matrix<T>& w,
                               const Matrix<T>& dy, Matrix<T>* dlocal, std::vector<T>* dglobal,
                               Matrix<T>& dw, std::span<T> db);

// max(x, slope * x); the subgradient at 0 is `slope`.
template <typename T>
Matrix<T> leaky_relu_forward(const Matrix<T>& x, T slope = T(kLeakySlope));

// `x` is the forward input.
template <typename T>
Matrix<T> leaky_relu_backward(const Matrix<T>& x, const Matrix<T>& dy, T slope = T(kLeakySlope));

template <typename T>
struct EdgeConvCache {
  Matrix<T> pre;                 // winning edge pre-activation per (point, channel)
  std::vector<uint32_t> argmax;  // winning neighbor point per (point, channel)
};

// EdgeConv: out_i = max over neighbors j of leaky_relu([x_i | x_j - x_i] W + b),
// W: 2d x d_out. Because leaky_relu is strictly increasing and the edge term
// splits as x_i (W_top - W_bot) + b + x_j W_bot, the max is taken over the
// neighbor half alone; the winning edge is the first in row order on ties.
template <typename T>
Matrix<T> edgeconv_forward(const Matrix<T>& x, const KnnGraph& graph, const Matrix<T>& w,
                           std::span<const T> b, EdgeConvCache<T>* cache);

// Graph indices are treated as constants.
template <typename T>
void edgeconv_backward(const Matrix<T>& x, const KnnGraph& graph, const Matrix<T>& w,
                       const EdgeConvCache<T>& cache, const Matrix<T>& dy, Matrix<T>* dx, Matrix<T>& dw,
                       std::span<T> db);

// Per-channel max over points; ties resolve to the lowest point index.
template <typename T>
std::vector<T> global_maxpool_forward(const Matrix<T>& x, std::vector<uint32_t>* argmax);

template <typename T>
Matrix<T> global_maxpool_backward(size_t n, std::span<const T> dy, std::span<const uint32_t> argmax);

template <typename T>
struct LossAndGrad {
  T loss = 0;
  Matrix<T> grad;
};

// Mean over points of -log softmax(logits)[label]; grad = (softmax - onehot) / n.
template <typename T>
LossAndGrad<T> softmax_cross_entropy(const Matrix<T>& logits, std::span<const uint8_t> labels);

}  // namespace vortexseg::nn
