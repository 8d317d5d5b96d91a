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
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "vortexseg/geometry.hpp"
#include "vortexseg/scan.hpp"

namespace vortexseg {

inline constexpr int kNoise = -1;

enum class ClusterAlgorithm {
  kAgglomerative,
  kDbscan,
  kOptics,
};

std::string_view algorithm_name(ClusterAlgorithm a);
ClusterAlgorithm algorithm_from_name(std::string_view name);  // "agglo", "dbscan", "optics"

struct ClusterParams {
  ClusterAlgorithm algorithm = ClusterAlgorithm::kAgglomerative;
  double linkage_threshold = 30.0;  // m
  double dbscan_eps = 12.0;         // m
  size_t dbscan_min_pts = 10;
  size_t optics_min_pts = 10;
  double optics_eps_max = 60.0;  // m
  double optics_eps = 12.0;      // m, extraction radius
  size_t min_cluster_size = 20;

  void validate() const;
};

struct Cluster {
  size_t size = 0;
  Vec2 centroid;
};

// assignment[i] is an index into `clusters` or kNoise. Clusters are numbered
// by their lowest member index.
struct ClusterResult {
  std::vector<int> assignment;
  std::vector<Cluster> clusters;
};

struct Detection {
  VortexClass vortex_class = VortexClass::kPort;
  Vec2 center;
  size_t support = 0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

// One agglomerative merge. Clusters are named by their lowest point index;
// `first` < `second`.
struct MergeStep {
  size_t first = 0;
  size_t second = 0;
  double cost = 0.0;  // Ward increase in within-cluster sum of squares

  friend bool operator==(const MergeStep&, const MergeStep&) = default;
};

// Ward agglomeration. Each step merges the admissible pair with the smallest
// sum-of-squares increase |A||B| / (|A| + |B|) * |c_A - c_B|^2, where a pair
// is admissible while its centroids are closer than `linkage_threshold`.
// Merging stops when no admissible pair is left. Equal costs go to the pair
// with the smaller (first, second) names.
ClusterResult agglomerative_ward(std::span<const Vec2> points, double linkage_threshold);
std::vector<MergeStep> ward_merge_sequence(std::span<const Vec2> points, double linkage_threshold);

// Classic DBSCAN. A point is core when at least min_pts points (itself
// included) lie within eps. Points are visited in index order; a border point
// joins the first cluster that reaches it.
ClusterResult dbscan(std::span<const Vec2> points, double eps, size_t min_pts);

struct OpticsResult {
  std::vector<uint32_t> ordering;
  // Indexed by point; infinity when undefined.
  std::vector<double> reachability;
  std::vector<double> core_distance;
};

inline constexpr double kUndefined = std::numeric_limits<double>::infinity();

// OPTICS ordering; the seed list pops the smallest reachability, then the
// smallest index. New components start at the lowest unprocessed index.
OpticsResult optics(std::span<const Vec2> points, size_t min_pts, double eps_max);

// DBSCAN-equivalent flat clustering at eps <= eps_max read off an ordering.
ClusterResult extract_dbscan(const OpticsResult& result, std::span<const Vec2> points, double eps);

// Per class: cluster that class's predicted points, drop noise and clusters
// smaller than min_cluster_size, report each survivor's centroid. Sorted by
// descending support, then by center (y, z), then class.
std::vector<Detection> refine(const std::vector<Vec2>& positions, std::span<const uint8_t> labels,
                              const ClusterParams& params);
std::vector<Detection> refine(const PointCloud& cloud, std::span<const uint8_t> labels,
                              const ClusterParams& params);

ClusterResult run_clustering(std::span<const Vec2> points, const ClusterParams& params);

}  // namespace vortexseg
