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

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

namespace vortexseg::nn {
namespace {

using testing::max_gradient_error;
using testing::random_matrix;
using testing::random_vector;
using testing::weighted_sum;

constexpr double kTol = 1e-6;

TEST(LinearTest, ForwardExample) {
  Matrix<double> x(1, 2);
  x.data = {1.0, 2.0};
  Matrix<double> w(2, 2);
  w.data = {1.0, 0.0, 0.0, 1.0};
  std::vector<double> b = {0.5, -0.5};
  Matrix<double> y = linear_forward<double>(x, w, b);
  EXPECT_EQ(y.data, (std::vector<double>{1.5, 1.5}));
  Matrix<double> bad(3, 2);
  EXPECT_THROW(linear_forward<double>(x, bad, b), std::invalid_argument);
}

TEST(LinearTest, GradientsMatchFiniteDifferences) {
  SplitMix64 rng(1);
  Matrix<double> x = random_matrix(5, 4, rng);
  Matrix<double> w = random_matrix(4, 3, rng);
  std::vector<double> b = random_vector(3, rng);
  Matrix<double> c = random_matrix(5, 3, rng);
  auto loss = [&] { return weighted_sum(linear_forward<double>(x, w, b), c); };

  Matrix<double> dx;
  Matrix<double> dw(4, 3);
  std::vector<double> db(3, 0.0);
  linear_backward<double>(x, w, c, &dx, dw, db);
  EXPECT_LT(max_gradient_error(x.data, dx.data, loss), kTol);
  EXPECT_LT(max_gradient_error(w.data, dw.data, loss), kTol);
  EXPECT_LT(max_gradient_error(b, db, loss), kTol);
}

TEST(LinearTest, BiasGradientIsColumnSumAndAccumulates) {
  SplitMix64 rng(2);
  Matrix<double> x = random_matrix(6, 2, rng);
  Matrix<double> w = random_matrix(2, 3, rng);
  Matrix<double> ones(6, 3, 1.0);
  Matrix<double> dw(2, 3);
  std::vector<double> db(3, 0.0);
  linear_backward<double>(x, w, ones, nullptr, dw, db);
  EXPECT_EQ(db, (std::vector<double>{6.0, 6.0, 6.0}));
  linear_backward<double>(x, w, ones, nullptr, dw, db);
  EXPECT_EQ(db, (std::vector<double>{12.0, 12.0, 12.0}));
}

TEST(LinearTest, GradientsDoNotDependOnHeapPlacement) {
  // Copies of the same upstream gradient land at different alignments (rows
  // span whole SIMD registers, so only the base address varies); the sums
  // must be bitwise identical regardless.
  SplitMix64 rng(21);
  Matrix<float> x = random_matrix<float>(200, 5, rng);
  Matrix<float> w = random_matrix<float>(5, 16, rng);
  Matrix<float> dy = random_matrix<float>(200, 16, rng);
  std::vector<float> global_ref, db_ref;
  std::vector<std::vector<float>> spacers;
  for (size_t r = 0; r < 16; ++r) {
    spacers.emplace_back(r + 1, 0.0f);
    Matrix<float> dy_copy = dy;
    Matrix<float> dw(5, 16);
    std::vector<float> db(16, 0.0f);
    linear_backward<float>(x, w, dy_copy, nullptr, dw, db);
    Matrix<float> dwb(8, 16);
    std::vector<float> dbb(16, 0.0f), dglobal;
    std::vector<float> global = {0.5f, -1.0f, 2.0f};
    Matrix<float> wb = random_matrix<float>(8, 16, rng);
    broadcast_linear_backward<float>(x, global, wb, dy_copy, nullptr, &dglobal, dwb, dbb);
    if (r == 0) {
      db_ref = db;
      global_ref = dbb;
      continue;
    }
    ASSERT_EQ(db, db_ref) << r;
    ASSERT_EQ(dbb, global_ref) << r;
  }
}

TEST(BroadcastLinearTest, EqualsLinearOverConcatenation) {
  SplitMix64 rng(3);
  Matrix<double> local = random_matrix(4, 3, rng);
  std::vector<double> global = random_vector(2, rng);
  Matrix<double> w = random_matrix(5, 2, rng);
  std::vector<double> b = random_vector(2, rng);
  Matrix<double> cat(4, 5);
  for (size_t i = 0; i < 4; ++i) {
    for (size_t j = 0; j < 3; ++j) cat(i, j) = local(i, j);
    for (size_t j = 0; j < 2; ++j) cat(i, 3 + j) = global[j];
  }
  Matrix<double> a = broadcast_linear_forward<double>(local, global, w, b);
  Matrix<double> e = linear_forward<double>(cat, w, b);
  for (size_t i = 0; i < a.data.size(); ++i) EXPECT_NEAR(a.data[i], e.data[i], 1e-12);
}

TEST(BroadcastLinearTest, GradientsMatchFiniteDifferences) {
  SplitMix64 rng(4);
  Matrix<double> local = random_matrix(5, 3, rng);
  std::vector<double> global = random_vector(4, rng);
  Matrix<double> w = random_matrix(7, 2, rng);
  std::vector<double> b = random_vector(2, rng);
  Matrix<double> c = random_matrix(5, 2, rng);
  auto loss = [&] { return weighted_sum(broadcast_linear_forward<double>(local, global, w, b), c); };

  Matrix<double> dlocal;
  std::vector<double> dglobal;
  Matrix<double> dw(7, 2);
  std::vector<double> db(2, 0.0);
  broadcast_linear_backward<double>(local, global, w, c, &dlocal, &dglobal, dw, db);
  EXPECT_LT(max_gradient_error(local.data, dlocal.data, loss), kTol);
  EXPECT_LT(max_gradient_error(global, dglobal, loss), kTol);
  EXPECT_LT(max_gradient_error(w.data, dw.data, loss), kTol);
  EXPECT_LT(max_gradient_error(b, db, loss), kTol);
}

TEST(LeakyReluTest, ForwardAndSubgradient) {
  Matrix<double> x(1, 3);
  x.data = {-2.0, 0.0, 3.0};
  EXPECT_EQ(leaky_relu_forward<double>(x).data, (std::vector<double>{-0.4, 0.0, 3.0}));
  Matrix<double> ones(1, 3, 1.0);
  EXPECT_EQ(leaky_relu_backward<double>(x, ones).data, (std::vector<double>{0.2, 0.2, 1.0}));
}

TEST(LeakyReluTest, GradientMatchesFiniteDifferencesAwayFromZero) {
  SplitMix64 rng(5);
  Matrix<double> x = random_matrix(6, 5, rng);
  for (auto& v : x.data) {
    if (std::abs(v) < 0.05) v += 0.1;
  }
  Matrix<double> c = random_matrix(6, 5, rng);
  auto loss = [&] { return weighted_sum(leaky_relu_forward<double>(x), c); };
  Matrix<double> dx = leaky_relu_backward<double>(x, c);
  EXPECT_LT(max_gradient_error(x.data, dx.data, loss), kTol);
}

// Direct edge enumeration, written without the neighbor-half shortcut.
Matrix<double> edgeconv_oracle(const Matrix<double>& x, const KnnGraph& g, const Matrix<double>& w,
                               const std::vector<double>& b) {
  size_t d = x.cols;
  Matrix<double> out(x.rows, w.cols, -INFINITY);
  for (size_t i = 0; i < x.rows; ++i) {
    for (uint32_t j : g.row(i)) {
      for (size_t o = 0; o < w.cols; ++o) {
        double s = b[o];
        for (size_t c = 0; c < d; ++c) s += x(i, c) * w(c, o) + (x(j, c) - x(i, c)) * w(d + c, o);
        double act = s > 0 ? s : kLeakySlope * s;
        out(i, o) = std::max(out(i, o), act);
      }
    }
  }
  return out;
}

TEST(EdgeConvTest, ForwardMatchesDirectEnumeration) {
  SplitMix64 rng(6);
  Matrix<double> x = random_matrix(12, 3, rng);
  KnnGraph g = knn_bruteforce(std::span<const double>(x.data), 12, 3, 4);
  Matrix<double> w = random_matrix(6, 5, rng);
  std::vector<double> b = random_vector(5, rng);
  Matrix<double> got = edgeconv_forward<double>(x, g, w, b, nullptr);
  Matrix<double> want = edgeconv_oracle(x, g, w, b);
  for (size_t i = 0; i < got.data.size(); ++i) EXPECT_NEAR(got.data[i], want.data[i], 1e-12);
}

TEST(EdgeConvTest, GradientsMatchFiniteDifferences) {
  SplitMix64 rng(7);
  const size_t n = 6, k = 2, d = 3, d_out = 4;
  Matrix<double> x = random_matrix(n, d, rng);
  // Graph held fixed while differentiating.
  KnnGraph g = knn_bruteforce(std::span<const double>(x.data), n, d, k);
  Matrix<double> w = random_matrix(2 * d, d_out, rng);
  std::vector<double> b = random_vector(d_out, rng);
  Matrix<double> c = random_matrix(n, d_out, rng);
  auto loss = [&] { return weighted_sum(edgeconv_forward<double>(x, g, w, b, nullptr), c); };

  EdgeConvCache<double> cache;
  edgeconv_forward<double>(x, g, w, b, &cache);
  Matrix<double> dx;
  Matrix<double> dw(2 * d, d_out);
  std::vector<double> db(d_out, 0.0);
  edgeconv_backward<double>(x, g, w, cache, c, &dx, dw, db);
  EXPECT_LT(max_gradient_error(x.data, dx.data, loss), 1e-5);
  EXPECT_LT(max_gradient_error(w.data, dw.data, loss), 1e-5);
  EXPECT_LT(max_gradient_error(b, db, loss), 1e-5);
}

TEST(GlobalMaxPoolTest, ForwardTiesAndGradient) {
  Matrix<double> x(3, 2);
  x.data = {1.0, 5.0, 4.0, 5.0, 4.0, -1.0};
  std::vector<uint32_t> arg;
  EXPECT_EQ(global_maxpool_forward<double>(x, &arg), (std::vector<double>{4.0, 5.0}));
  EXPECT_EQ(arg, (std::vector<uint32_t>{1, 0}));
  std::vector<double> dy = {2.0, 3.0};
  Matrix<double> dx = global_maxpool_backward<double>(3, dy, arg);
  EXPECT_EQ(dx.data, (std::vector<double>{0, 3, 2, 0, 0, 0}));
}

TEST(GlobalMaxPoolTest, GradientMatchesFiniteDifferences) {
  SplitMix64 rng(8);
  Matrix<double> x = random_matrix(5, 4, rng);
  std::vector<double> c = random_vector(4, rng);
  auto loss = [&] {
    auto y = global_maxpool_forward<double>(x, nullptr);
    double s = 0.0;
    for (size_t j = 0; j < y.size(); ++j) s += y[j] * c[j];
    return s;
  };
  std::vector<uint32_t> arg;
  global_maxpool_forward<double>(x, &arg);
  Matrix<double> dx = global_maxpool_backward<double>(5, c, arg);
  EXPECT_LT(max_gradient_error(x.data, dx.data, loss), kTol);
}

TEST(SoftmaxCrossEntropyTest, UniformLogitsGiveLogThree) {
  Matrix<double> z(4, 3, 0.7);
  std::vector<uint8_t> labels = {0, 1, 2, 1};
  auto r = softmax_cross_entropy<double>(z, labels);
  EXPECT_NEAR(r.loss, std::log(3.0), 1e-12);
  EXPECT_NEAR(r.grad(1, 1), (1.0 / 3.0 - 1.0) / 4.0, 1e-12);
  EXPECT_NEAR(r.grad(1, 0), (1.0 / 3.0) / 4.0, 1e-12);
}

TEST(SoftmaxCrossEntropyTest, StableForLargeLogits) {
  Matrix<double> z(1, 3);
  z.data = {1000.0, 0.0, -1000.0};
  std::vector<uint8_t> labels = {0};
  auto r = softmax_cross_entropy<double>(z, labels);
  EXPECT_NEAR(r.loss, 0.0, 1e-12);
  EXPECT_TRUE(std::isfinite(r.grad(0, 2)));
  Matrix<float> zf(1, 3);
  zf.data = {1000.0f, 0.0f, -1000.0f};
  labels = {2};
  EXPECT_NEAR(softmax_cross_entropy<float>(zf, labels).loss, 2000.0f, 1e-2f);
}

TEST(SoftmaxCrossEntropyTest, GradientMatchesFiniteDifferences) {
  SplitMix64 rng(9);
  Matrix<double> z = random_matrix(4, 3, rng, -3.0, 3.0);
  std::vector<uint8_t> labels = {2, 0, 1, 1};
  auto loss = [&] { return softmax_cross_entropy<double>(z, labels).loss; };
  auto r = softmax_cross_entropy<double>(z, labels);
  EXPECT_LT(max_gradient_error(z.data, r.grad.data, loss), kTol);
  // Rows of the gradient sum to zero.
  for (size_t i = 0; i < 4; ++i) EXPECT_NEAR(r.grad(i, 0) + r.grad(i, 1) + r.grad(i, 2), 0.0, 1e-15);
}

TEST(SoftmaxCrossEntropyTest, Errors) {
  Matrix<double> z(2, 3);
  std::vector<uint8_t> short_labels = {0};
  EXPECT_THROW(softmax_cross_entropy<double>(z, short_labels), std::invalid_argument);
  std::vector<uint8_t> bad = {0, 3};
  EXPECT_THROW(softmax_cross_entropy<double>(z, bad), std::invalid_argument);
}

}  // namespace
}  // namespace vortexseg::nn
