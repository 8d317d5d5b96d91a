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

#include "vortexseg/nn_ops.hpp"

#define EIGEN_DONT_PARALLELIZE
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace vortexseg::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;

template <typename T>
Eigen::Map<RowMat<T>> view(Matrix<T>& m) {
  return {m.data.data(), static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols)};
}

template <typename T>
Eigen::Map<const RowMat<T>> view(const Matrix<T>& m) {
  return {m.data.data(), static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols)};
}

template <typename T>
Eigen::Map<const RowVec<T>> view(std::span<const T> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

template <typename T>
Eigen::Map<RowVec<T>> view(std::span<T> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

std::string dims(size_t r, size_t c) { return std::to_string(r) + "x" + std::to_string(c); }

// Column sums accumulated row by row. Eigen's vectorized colwise().sum()
// picks its summation order from the data pointer's alignment, which would
// make gradients depend on heap layout.
template <typename T>
RowVec<T> column_sums(const Matrix<T>& m) {
  RowVec<T> s = RowVec<T>::Zero(static_cast<Eigen::Index>(m.cols));
  for (size_t i = 0; i < m.rows; ++i) {
    const T* r = m.row(i);
    for (size_t j = 0; j < m.cols; ++j) s[static_cast<Eigen::Index>(j)] += r[j];
  }
  return s;
}

}  // namespace

template <typename T>
Matrix<T> linear_forward(const Matrix<T>& x, const Matrix<T>& w, std::span<const T> b) {
  check_shape(x.cols == w.rows && b.size() == w.cols, "linear_forward",
              "x " + dims(x.rows, x.cols) + ", W " + dims(w.rows, w.cols) + ", b " + std::to_string(b.size()));
  Matrix<T> y(x.rows, w.cols);
  view(y).noalias() = view(x) * view(w);
  view(y).rowwise() += view(b);
  return y;
}

template <typename T>
void linear_backward(const Matrix<T>& x, const Matrix<T>& w, const Matrix<T>& dy, Matrix<T>* dx,
                     Matrix<T>& dw, std::span<T> db) {
  check_shape(dy.rows == x.rows && dy.cols == w.cols && dw.rows == w.rows && dw.cols == w.cols &&
                  db.size() == w.cols,
              "linear_backward", "dy " + dims(dy.rows, dy.cols));
  view(dw).noalias() += view(x).transpose() * view(dy);
  view(db) += column_sums(dy);
  if (dx != nullptr) {
    *dx = Matrix<T>(x.rows, x.cols);
    view(*dx).noalias() = view(dy) * view(w).transpose();
  }
}

template <typename T>
Matrix<T> broadcast_linear_forward(const Matrix<T>& local, std::span<const T> global, const Matrix<T>& w,
                                   std::span<const T> b) {
  const size_t dl = local.cols;
  check_shape(w.rows == dl + global.size() && b.size() == w.cols, "broadcast_linear_forward",
              "local " + dims(local.rows, dl) + ", global " + std::to_string(global.size()) + ", W " +
                  dims(w.rows, w.cols));
  auto wv = view(w);
  RowVec<T> shared = view(global) * wv.bottomRows(static_cast<Eigen::Index>(global.size())) + view(b);
  Matrix<T> y(local.rows, w.cols);
  view(y).noalias() = view(local) * wv.topRows(static_cast<Eigen::Index>(dl));
  view(y).rowwise() += shared;
  return y;
}

template <typename T>
void broadcast_linear_backward(const Matrix<T>& local, std::span<const T> global, const Matrix<T>& w,
                               const Matrix<T>& dy, Matrix<T>* dlocal, std::vector<T>* dglobal,
                               Matrix<T>& dw, std::span<T> db) {
  const auto dl = static_cast<Eigen::Index>(local.cols);
  const auto dg = static_cast<Eigen::Index>(global.size());
  check_shape(dy.rows == local.rows && dy.cols == w.cols && dw.rows == w.rows && dw.cols == w.cols,
              "broadcast_linear_backward", "dy " + dims(dy.rows, dy.cols));
  auto wv = view(w);
  auto dwv = view(dw);
  RowVec<T> dy_sum = column_sums(dy);
  dwv.topRows(dl).noalias() += view(local).transpose() * view(dy);
  dwv.bottomRows(dg).noalias() += view(global).transpose() * dy_sum;
  view(db) += dy_sum;
  if (dlocal != nullptr) {
    *dlocal = Matrix<T>(local.rows, local.cols);
    view(*dlocal).noalias() = view(dy) * wv.topRows(dl).transpose();
  }
  if (dglobal != nullptr) {
    dglobal->assign(global.size(), T(0));
    view(std::span<T>(*dglobal)).noalias() = dy_sum * wv.bottomRows(dg).transpose();
  }
}

template <typename T>
Matrix<T> leaky_relu_forward(const Matrix<T>& x, T slope) {
  Matrix<T> y(x.rows, x.cols);
  for (size_t i = 0; i < x.data.size(); ++i) {
    T v = x.data[i];
    y.data[i] = v > T(0) ? v : slope * v;
  }
  return y;
}

template <typename T>
Matrix<T> leaky_relu_backward(const Matrix<T>& x, const Matrix<T>& dy, T slope) {
  check_shape(x.rows == dy.rows && x.cols == dy.cols, "leaky_relu_backward", dims(dy.rows, dy.cols));
  Matrix<T> dx(x.rows, x.cols);
  for (size_t i = 0; i < x.data.size(); ++i) dx.data[i] = x.data[i] > T(0) ? dy.data[i] : slope * dy.data[i];
  return dx;
}

template <typename T>
Matrix<T> edgeconv_forward(const Matrix<T>& x, const KnnGraph& graph, const Matrix<T>& w,
                           std::span<const T> b, EdgeConvCache<T>* cache) {
  const size_t n = x.rows;
  const size_t d = x.cols;
  const size_t out = w.cols;
  check_shape(w.rows == 2 * d && b.size() == out, "edgeconv_forward",
              "x " + dims(n, d) + ", W " + dims(w.rows, w.cols));
  check_shape(graph.n == n && graph.k >= 1, "edgeconv_forward",
              "graph over " + std::to_string(graph.n) + " points, x has " + std::to_string(n));

  auto wv = view(w);
  const auto di = static_cast<Eigen::Index>(d);
  RowMat<T> w_center = wv.topRows(di) - wv.bottomRows(di);
  Matrix<T> center(n, out);
  view(center).noalias() = view(x) * w_center;
  view(center).rowwise() += view(b);
  Matrix<T> neighbor(n, out);
  view(neighbor).noalias() = view(x) * wv.bottomRows(di);

  Matrix<T> pre(n, out);
  std::vector<uint32_t> argmax(n * out);
  for (size_t i = 0; i < n; ++i) {
    auto row = graph.row(i);
    T* best = pre.row(i);
    uint32_t* best_j = argmax.data() + i * out;
    const T* first = neighbor.row(row[0]);
    for (size_t c = 0; c < out; ++c) {
      best[c] = first[c];
      best_j[c] = row[0];
    }
    for (size_t e = 1; e < row.size(); ++e) {
      const T* cand = neighbor.row(row[e]);
      for (size_t c = 0; c < out; ++c) {
        if (cand[c] > best[c]) {
          best[c] = cand[c];
          best_j[c] = row[e];
        }
      }
    }
    const T* ci = center.row(i);
    for (size_t c = 0; c < out; ++c) best[c] += ci[c];
  }

  Matrix<T> y = leaky_relu_forward(pre);
  if (cache != nullptr) {
    cache->pre = std::move(pre);
    cache->argmax = std::move(argmax);
  }
  return y;
}

template <typename T>
void edgeconv_backward(const Matrix<T>& x, const KnnGraph& graph, const Matrix<T>& w,
                       const EdgeConvCache<T>& cache, const Matrix<T>& dy, Matrix<T>* dx, Matrix<T>& dw,
                       std::span<T> db) {
  const size_t n = x.rows;
  const size_t d = x.cols;
  const size_t out = w.cols;
  check_shape(dy.rows == n && dy.cols == out && cache.pre.rows == n && graph.n == n &&
                  dw.rows == w.rows && dw.cols == w.cols,
              "edgeconv_backward", "dy " + dims(dy.rows, dy.cols));

  Matrix<T> d_center = leaky_relu_backward(cache.pre, dy);
  Matrix<T> d_neighbor(n, out);
  for (size_t i = 0; i < n; ++i) {
    const T* g = d_center.row(i);
    const uint32_t* j = cache.argmax.data() + i * out;
    for (size_t c = 0; c < out; ++c) d_neighbor(j[c], c) += g[c];
  }

  const auto di = static_cast<Eigen::Index>(d);
  auto wv = view(w);
  auto dwv = view(dw);
  RowMat<T> dw_center = view(x).transpose() * view(d_center);
  dwv.topRows(di) += dw_center;
  dwv.bottomRows(di) -= dw_center;
  dwv.bottomRows(di).noalias() += view(x).transpose() * view(d_neighbor);
  view(db) += column_sums(d_center);

  if (dx != nullptr) {
    RowMat<T> w_center = wv.topRows(di) - wv.bottomRows(di);
    *dx = Matrix<T>(n, d);
    view(*dx).noalias() = view(d_center) * w_center.transpose();
    view(*dx).noalias() += view(d_neighbor) * wv.bottomRows(di).transpose();
  }
}

template <typename T>
std::vector<T> global_maxpool_forward(const Matrix<T>& x, std::vector<uint32_t>* argmax) {
  if (x.rows == 0) throw std::invalid_argument("global_maxpool: empty input");
  std::vector<T> best(x.row(0), x.row(0) + x.cols);
  std::vector<uint32_t> idx(x.cols, 0);
  for (size_t i = 1; i < x.rows; ++i) {
    const T* r = x.row(i);
    for (size_t c = 0; c < x.cols; ++c) {
      if (r[c] > best[c]) {
        best[c] = r[c];
        idx[c] = static_cast<uint32_t>(i);
      }
    }
  }
  if (argmax != nullptr) *argmax = std::move(idx);
  return best;
}

template <typename T>
Matrix<T> global_maxpool_backward(size_t n, std::span<const T> dy, std::span<const uint32_t> argmax) {
  check_shape(dy.size() == argmax.size(), "global_maxpool_backward", std::to_string(dy.size()));
  Matrix<T> dx(n, dy.size());
  for (size_t c = 0; c < dy.size(); ++c) dx(argmax[c], c) += dy[c];
  return dx;
}

template <typename T>
LossAndGrad<T> softmax_cross_entropy(const Matrix<T>& logits, std::span<const uint8_t> labels) {
  check_shape(logits.rows == labels.size() && logits.rows > 0, "softmax_cross_entropy",
              "logits " + dims(logits.rows, logits.cols) + ", labels " + std::to_string(labels.size()));
  const size_t n = logits.rows;
  const size_t c = logits.cols;
  LossAndGrad<T> out{T(0), Matrix<T>(n, c)};
  double total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (labels[i] >= c) {
      throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(labels[i]) + " out of range");
    }
    const T* z = logits.row(i);
    T m = *std::max_element(z, z + c);
    T sum = 0;
    T* g = out.grad.row(i);
    for (size_t j = 0; j < c; ++j) {
      g[j] = std::exp(z[j] - m);
      sum += g[j];
    }
    total += static_cast<double>(std::log(sum) - (z[labels[i]] - m));
    for (size_t j = 0; j < c; ++j) g[j] = g[j] / sum / static_cast<T>(n);
    g[labels[i]] -= T(1) / static_cast<T>(n);
  }
  out.loss = static_cast<T>(total / static_cast<double>(n));
  return out;
}

#define VORTEXSEG_INSTANTIATE(T)                                                                            \
  template Matrix<T> linear_forward(const Matrix<T>&, const Matrix<T>&, std::span<const T>);              \
  template void linear_backward(const Matrix<T>&, const Matrix<T>&, const Matrix<T>&, Matrix<T>*,          \
                                Matrix<T>&, std::span<T>);                                                 \
  template Matrix<T> broadcast_linear_forward(const Matrix<T>&, std::span<const T>, const Matrix<T>&,      \
                                              std::span<const T>);                                         \
  template void broadcast_linear_backward(const Matrix<T>&, std::span<const T>, const Matrix<T>&,          \
                                          const Matrix<T>&, Matrix<T>*, std::vector<T>*, Matrix<T>&,       \
                                          std::span<T>);                                                   \
  template Matrix<T> leaky_relu_forward(const Matrix<T>&, T);                                              \
  template Matrix<T> leaky_relu_backward(const Matrix<T>&, const Matrix<T>&, T);                           \
  template Matrix<T> edgeconv_forward(const Matrix<T>&, const KnnGraph&, const Matrix<T>&,                 \
                                      std::span<const T>, EdgeConvCache<T>*);                              \
  template void edgeconv_backward(const Matrix<T>&, const KnnGraph&, const Matrix<T>&,                     \
                                  const EdgeConvCache<T>&, const Matrix<T>&, Matrix<T>*, Matrix<T>&,       \
                                  std::span<T>);                                                           \
  template std::vector<T> global_maxpool_forward(const Matrix<T>&, std::vector<uint32_t>*);                \
  template Matrix<T> global_maxpool_backward(size_t, std::span<const T>, std::span<const uint32_t>);       \
  template LossAndGrad<T> softmax_cross_entropy(const Matrix<T>&, std::span<const uint8_t>);

VORTEXSEG_INSTANTIATE(float)
VORTEXSEG_INSTANTIATE(double)

#undef VORTEXSEG_INSTANTIATE

}  // namespace vortexseg::nn
