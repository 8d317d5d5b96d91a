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

#include "vortexseg/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace vortexseg {

namespace {

void check_args(size_t len, size_t n, size_t d, size_t k) {
  if (len != n * d) throw std::invalid_argument("knn: feature buffer does not match n x d");
  if (k >= n) {
    throw std::invalid_argument("knn: k=" + std::to_string(k) + " must be smaller than n=" + std::to_string(n));
  }
  if (k == 0) throw std::invalid_argument("knn: k must be positive");
}

// Bounded candidate list kept sorted by (distance, index).
template <typename T>
class TopK {
 public:
  explicit TopK(size_t k) : k_(k) { items_.reserve(k + 1); }

  bool full() const { return items_.size() == k_; }
  T worst() const { return items_.back().first; }

  void offer(T d, uint32_t j) {
    if (full() && !less({d, j}, items_.back())) return;
    auto pos = std::upper_bound(items_.begin(), items_.end(), std::pair{d, j}, less);
    items_.insert(pos, {d, j});
    if (items_.size() > k_) items_.pop_back();
  }

  void write(uint32_t* out) const {
    for (size_t i = 0; i < items_.size(); ++i) out[i] = items_[i].second;
  }

 private:
  static bool less(const std::pair<T, uint32_t>& a, const std::pair<T, uint32_t>& b) {
    return a.first < b.first || (a.first == b.first && a.second < b.second);
  }

  size_t k_;
  std::vector<std::pair<T, uint32_t>> items_;
};

template <typename T>
T squared_distance(const T* a, const T* b, size_t d) {
  T sum = 0;
  for (size_t c = 0; c < d; ++c) {
    T diff = a[c] - b[c];
    sum += diff * diff;
  }
  return sum;
}

template <typename T>
KnnGraph bruteforce_impl(std::span<const T> features, size_t n, size_t d, size_t k) {
  check_args(features.size(), n, d, k);
  KnnGraph g{n, k, std::vector<uint32_t>(n * k)};
  const T* x = features.data();
  for (size_t i = 0; i < n; ++i) {
    TopK<T> top(k);
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      top.offer(squared_distance(x + i * d, x + j * d, d), static_cast<uint32_t>(j));
    }
    top.write(g.neighbors.data() + i * k);
  }
  return g;
}

template <typename T>
KnnGraph grid_impl(std::span<const T> xy, size_t n, size_t k) {
  check_args(xy.size(), n, 2, k);
  double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
  double min_y = min_x, max_y = -min_x;
  for (size_t i = 0; i < n; ++i) {
    min_x = std::min<double>(min_x, xy[2 * i]);
    max_x = std::max<double>(max_x, xy[2 * i]);
    min_y = std::min<double>(min_y, xy[2 * i + 1]);
    max_y = std::max<double>(max_y, xy[2 * i + 1]);
  }
  if (!std::isfinite(min_x) || !std::isfinite(max_x) || !std::isfinite(min_y) || !std::isfinite(max_y)) {
    throw std::invalid_argument("knn_grid: non-finite coordinates");
  }
  double extent = std::max(max_x - min_x, max_y - min_y);
  if (extent <= 0.0) return bruteforce_impl(xy, n, 2, k);

  // About two points per bucket for an evenly spread cloud.
  double area = std::max(max_x - min_x, extent * 1e-6) * std::max(max_y - min_y, extent * 1e-6);
  double cell = std::sqrt(2.0 * area / static_cast<double>(n));
  auto nx = static_cast<int64_t>(std::floor((max_x - min_x) / cell)) + 1;
  auto ny = static_cast<int64_t>(std::floor((max_y - min_y) / cell)) + 1;

  auto bucket_of = [&](size_t i) {
    auto cx = std::min<int64_t>(nx - 1, static_cast<int64_t>((xy[2 * i] - min_x) / cell));
    auto cy = std::min<int64_t>(ny - 1, static_cast<int64_t>((xy[2 * i + 1] - min_y) / cell));
    return std::pair{cx, cy};
  };

  // Counting sort of point indices into buckets.
  std::vector<uint32_t> start(static_cast<size_t>(nx * ny) + 1, 0);
  std::vector<uint32_t> bucket(n);
  for (size_t i = 0; i < n; ++i) {
    auto [cx, cy] = bucket_of(i);
    bucket[i] = static_cast<uint32_t>(cy * nx + cx);
    ++start[bucket[i] + 1];
  }
  for (size_t b = 1; b < start.size(); ++b) start[b] += start[b - 1];
  std::vector<uint32_t> members(n);
  std::vector<uint32_t> fill(start.begin(), start.end() - 1);
  for (size_t i = 0; i < n; ++i) members[fill[bucket[i]]++] = static_cast<uint32_t>(i);

  KnnGraph g{n, k, std::vector<uint32_t>(n * k)};
  const int64_t max_ring = std::max(nx, ny);
  for (size_t i = 0; i < n; ++i) {
    auto [cx, cy] = bucket_of(i);
    TopK<T> top(k);
    auto visit = [&](int64_t bx, int64_t by) {
      if (bx < 0 || by < 0 || bx >= nx || by >= ny) return;
      size_t b = static_cast<size_t>(by * nx + bx);
      for (uint32_t m = start[b]; m < start[b + 1]; ++m) {
        uint32_t j = members[m];
        if (j == i) continue;
        top.offer(squared_distance(&xy[2 * i], &xy[2 * j], 2), j);
      }
    };
    for (int64_t r = 0; r <= max_ring; ++r) {
      if (r == 0) {
        visit(cx, cy);
      } else {
        for (int64_t dx = -r; dx <= r; ++dx) {
          visit(cx + dx, cy - r);
          visit(cx + dx, cy + r);
        }
        for (int64_t dy = -r + 1; dy <= r - 1; ++dy) {
          visit(cx - r, cy + dy);
          visit(cx + r, cy + dy);
        }
      }
      // Every point in ring r + 1 is at least r * cell away.
      double bound = static_cast<double>(r) * cell * (1.0 - 1e-6);
      if (top.full() && bound * bound > static_cast<double>(top.worst())) break;
    }
    top.write(g.neighbors.data() + i * k);
  }
  return g;
}

}  // namespace

KnnGraph knn_bruteforce(std::span<const float> features, size_t n, size_t d, size_t k) {
  return bruteforce_impl(features, n, d, k);
}

KnnGraph knn_bruteforce(std::span<const double> features, size_t n, size_t d, size_t k) {
  return bruteforce_impl(features, n, d, k);
}

KnnGraph knn_grid(std::span<const double> xy, size_t n, size_t k) { return grid_impl(xy, n, k); }

KnnGraph knn_grid(std::span<const float> xy, size_t n, size_t k) { return grid_impl(xy, n, k); }

}  // namespace vortexseg
