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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace vortexseg {

inline constexpr size_t kDefaultK = 20;

// n x k neighbor table. Row i lists the k points closest to i (self
// excluded), ascending by (squared distance, index).
struct KnnGraph {
  size_t n = 0;
  size_t k = 0;
  std::vector<uint32_t> neighbors;

  std::span<const uint32_t> row(size_t i) const { return {neighbors.data() + i * k, k}; }
  friend bool operator==(const KnnGraph&, const KnnGraph&) = default;
};

// Exact kNN over an n x d row-major feature matrix.
KnnGraph knn_bruteforce(std::span<const float> features, size_t n, size_t d, size_t k);
KnnGraph knn_bruteforce(std::span<const double> features, size_t n, size_t d, size_t k);

// Same result as knn_bruteforce for d = 2, using uniform-grid bucketing.
KnnGraph knn_grid(std::span<const double> xy, size_t n, size_t k);
KnnGraph knn_grid(std::span<const float> xy, size_t n, size_t k);

}  // namespace vortexseg
