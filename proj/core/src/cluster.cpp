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

#include "vortexseg/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace vortexseg {

std::string_view algorithm_name(ClusterAlgorithm a) {
  switch (a) {
    case ClusterAlgorithm::kAgglomerative:
      return "agglo";
    case ClusterAlgorithm::kDbscan:
      return "dbscan";
    case ClusterAlgorithm::kOptics:
      return "optics";
  }
  return "unknown";
}

ClusterAlgorithm algorithm_from_name(std::string_view name) {
  if (name == "agglo" || name == "agglomerative") return ClusterAlgorithm::kAgglomerative;
  if (name == "dbscan") return ClusterAlgorithm::kDbscan;
  if (name == "optics") return ClusterAlgorithm::kOptics;
  throw std::invalid_argument("unknown clustering algorithm '" + std::string(name) + "'");
}

void ClusterParams::validate() const {
  if (!(linkage_threshold > 0.0) || !(dbscan_eps > 0.0) || !(optics_eps_max > 0.0) || !(optics_eps > 0.0)) {
    throw std::invalid_argument("ClusterParams: thresholds must be positive");
  }
  if (dbscan_min_pts < 1 || optics_min_pts < 1) throw std::invalid_argument("ClusterParams: min_pts must be >= 1");
  if (optics_eps > optics_eps_max) throw std::invalid_argument("ClusterParams: optics eps exceeds eps_max");
}

namespace {

// Uniform-grid radius queries; results ascending by index.
class RadiusIndex {
 public:
  RadiusIndex(std::span<const Vec2> points, double radius) : points_(points), radius_(radius) {
    for (uint32_t i = 0; i < points.size(); ++i) cells_[key(cell_of(points[i]))].push_back(i);
  }

  std::vector<uint32_t> query(uint32_t i) const {
    std::vector<uint32_t> out;
    auto [cx, cy] = cell_of(points_[i]);
    const double r2 = radius_ * radius_;
    for (int64_t dx = -1; dx <= 1; ++dx) {
      for (int64_t dy = -1; dy <= 1; ++dy) {
        auto it = cells_.find(key({cx + dx, cy + dy}));
        if (it == cells_.end()) continue;
        for (uint32_t j : it->second) {
          if ((points_[j] - points_[i]).norm_sq() <= r2) out.push_back(j);
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::pair<int64_t, int64_t> cell_of(Vec2 p) const {
    return {static_cast<int64_t>(std::floor(p.y / radius_)), static_cast<int64_t>(std::floor(p.z / radius_))};
  }
  static uint64_t key(std::pair<int64_t, int64_t> c) {
    return (static_cast<uint64_t>(c.first) << 32) ^ (static_cast<uint64_t>(c.second) & 0xFFFFFFFFULL);
  }

  std::span<const Vec2> points_;
  double radius_;
  std::unordered_map<uint64_t, std::vector<uint32_t>> cells_;
};

// Renumbers raw labels (any non-negative ids) by lowest member index and
// fills in sizes and centroids.
ClusterResult finalize(std::span<const Vec2> points, const std::vector<int>& raw) {
  ClusterResult result;
  result.assignment.assign(points.size(), kNoise);
  std::unordered_map<int, int> remap;
  for (size_t i = 0; i < points.size(); ++i) {
    if (raw[i] == kNoise) continue;
    auto [it, inserted] = remap.try_emplace(raw[i], static_cast<int>(result.clusters.size()));
    if (inserted) result.clusters.push_back({});
    result.assignment[i] = it->second;
  }
  std::vector<double> sy(result.clusters.size(), 0.0), sz(result.clusters.size(), 0.0);
  for (size_t i = 0; i < points.size(); ++i) {
    int c = result.assignment[i];
    if (c == kNoise) continue;
    result.clusters[c].size += 1;
    sy[c] += points[i].y;
    sz[c] += points[i].z;
  }
  for (size_t c = 0; c < result.clusters.size(); ++c) {
    auto n = static_cast<double>(result.clusters[c].size);
    result.clusters[c].centroid = {sy[c] / n, sz[c] / n};
  }
  return result;
}

struct WardState {
  size_t size;
  Vec2 centroid;
};

double ward_cost(const WardState& a, const WardState& b) {
  double na = static_cast<double>(a.size);
  double nb = static_cast<double>(b.size);
  return na * nb / (na + nb) * (a.centroid - b.centroid).norm_sq();
}

struct Candidate {
  double cost = kUndefined;
  size_t partner = 0;
  bool valid = false;
};

// (cost, first, second) ordering of candidate merges.
bool better(double cost, size_t a, size_t b, double best_cost, size_t best_a, size_t best_b) {
  if (cost != best_cost) return cost < best_cost;
  return std::pair{std::min(a, b), std::max(a, b)} < std::pair{std::min(best_a, best_b), std::max(best_a, best_b)};
}

std::pair<std::vector<MergeStep>, std::vector<int>> run_ward(std::span<const Vec2> points, double threshold) {
  const size_t m = points.size();
  std::vector<WardState> state(m);
  std::vector<bool> active(m, true);
  std::vector<int> owner(m);
  for (size_t i = 0; i < m; ++i) {
    state[i] = {1, points[i]};
    owner[i] = static_cast<int>(i);
  }
  const double t2 = threshold * threshold;
  auto admissible = [&](size_t a, size_t b) {
    return std::isinf(threshold) || (state[a].centroid - state[b].centroid).norm_sq() < t2;
  };

  std::vector<Candidate> best(m);
  auto rescan = [&](size_t a) {
    Candidate c;
    for (size_t b = 0; b < m; ++b) {
      if (b == a || !active[b] || !admissible(a, b)) continue;
      double cost = ward_cost(state[a], state[b]);
      if (!c.valid || better(cost, a, b, c.cost, a, c.partner)) c = {cost, b, true};
    }
    best[a] = c;
  };
  for (size_t a = 0; a < m; ++a) rescan(a);

  std::vector<MergeStep> merges;
  while (true) {
    size_t ga = 0;
    bool found = false;
    for (size_t a = 0; a < m; ++a) {
      if (!active[a] || !best[a].valid) continue;
      if (!found || better(best[a].cost, a, best[a].partner, best[ga].cost, ga, best[ga].partner)) {
        ga = a;
        found = true;
      }
    }
    if (!found) break;
    size_t a = std::min(ga, best[ga].partner);
    size_t b = std::max(ga, best[ga].partner);
    merges.push_back({a, b, best[ga].cost});

    double na = static_cast<double>(state[a].size);
    double nb = static_cast<double>(state[b].size);
    state[a].centroid = (1.0 / (na + nb)) * (na * state[a].centroid + nb * state[b].centroid);
    state[a].size += state[b].size;
    active[b] = false;
    best[b].valid = false;
    for (size_t i = 0; i < m; ++i) {
      if (owner[i] == static_cast<int>(b)) owner[i] = static_cast<int>(a);
    }

    rescan(a);
    for (size_t c = 0; c < m; ++c) {
      if (!active[c] || c == a) continue;
      if (best[c].valid && (best[c].partner == a || best[c].partner == b)) {
        rescan(c);
        continue;
      }
      if (admissible(c, a)) {
        double cost = ward_cost(state[c], state[a]);
        if (!best[c].valid || better(cost, c, a, best[c].cost, c, best[c].partner)) best[c] = {cost, a, true};
      }
    }
  }
  return {merges, owner};
}

}  // namespace

std::vector<MergeStep> ward_merge_sequence(std::span<const Vec2> points, double linkage_threshold) {
  if (!(linkage_threshold >= 0.0)) throw std::invalid_argument("agglomerative_ward: negative threshold");
  return run_ward(points, linkage_threshold).first;
}

ClusterResult agglomerative_ward(std::span<const Vec2> points, double linkage_threshold) {
  if (!(linkage_threshold >= 0.0)) throw std::invalid_argument("agglomerative_ward: negative threshold");
  return finalize(points, run_ward(points, linkage_threshold).second);
}

ClusterResult dbscan(std::span<const Vec2> points, double eps, size_t min_pts) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("dbscan: eps must be positive and finite");
  if (min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be >= 1");
  const size_t m = points.size();
  std::vector<int> raw(m, kNoise);
  if (m == 0) return finalize(points, raw);
  RadiusIndex index(points, eps);
  std::vector<std::vector<uint32_t>> neighbors(m);
  for (uint32_t i = 0; i < m; ++i) neighbors[i] = index.query(i);
  auto is_core = [&](size_t i) { return neighbors[i].size() >= min_pts; };

  int next_id = 0;
  std::vector<bool> visited(m, false);
  for (size_t i = 0; i < m; ++i) {
    if (visited[i] || !is_core(i)) continue;
    const int id = next_id++;
    std::deque<uint32_t> queue{static_cast<uint32_t>(i)};
    visited[i] = true;
    raw[i] = id;
    while (!queue.empty()) {
      uint32_t p = queue.front();
      queue.pop_front();
      for (uint32_t q : neighbors[p]) {
        if (raw[q] == kNoise) raw[q] = id;
        if (!visited[q] && is_core(q)) {
          visited[q] = true;
          raw[q] = id;
          queue.push_back(q);
        }
      }
    }
  }
  return finalize(points, raw);
}

OpticsResult optics(std::span<const Vec2> points, size_t min_pts, double eps_max) {
  if (min_pts < 1) throw std::invalid_argument("optics: min_pts must be >= 1");
  if (!(eps_max > 0.0) || !std::isfinite(eps_max)) {
    throw std::invalid_argument("optics: eps_max must be positive and finite");
  }
  const size_t m = points.size();
  OpticsResult out;
  out.reachability.assign(m, kUndefined);
  out.core_distance.assign(m, kUndefined);
  if (m == 0) return out;

  RadiusIndex index(points, eps_max);
  std::vector<std::vector<uint32_t>> neighbors(m);
  for (uint32_t i = 0; i < m; ++i) {
    neighbors[i] = index.query(i);
    if (neighbors[i].size() >= min_pts) {
      std::vector<double> d;
      d.reserve(neighbors[i].size());
      for (uint32_t j : neighbors[i]) d.push_back(distance(points[i], points[j]));
      std::nth_element(d.begin(), d.begin() + static_cast<ptrdiff_t>(min_pts - 1), d.end());
      out.core_distance[i] = d[min_pts - 1];
    }
  }

  std::vector<bool> processed(m, false);
  std::set<std::pair<double, uint32_t>> seeds;
  auto update = [&](uint32_t p) {
    if (std::isinf(out.core_distance[p])) return;
    for (uint32_t q : neighbors[p]) {
      if (processed[q]) continue;
      double reach = std::max(out.core_distance[p], distance(points[p], points[q]));
      if (reach < out.reachability[q]) {
        if (!std::isinf(out.reachability[q])) seeds.erase({out.reachability[q], q});
        out.reachability[q] = reach;
        seeds.insert({reach, q});
      }
    }
  };

  for (uint32_t start = 0; start < m; ++start) {
    if (processed[start]) continue;
    processed[start] = true;
    out.ordering.push_back(start);
    update(start);
    while (!seeds.empty()) {
      auto [reach, q] = *seeds.begin();
      seeds.erase(seeds.begin());
      processed[q] = true;
      out.ordering.push_back(q);
      update(q);
    }
  }
  return out;
}

ClusterResult extract_dbscan(const OpticsResult& result, std::span<const Vec2> points, double eps) {
  std::vector<int> raw(points.size(), kNoise);
  int current = kNoise;
  int next_id = 0;
  for (uint32_t p : result.ordering) {
    if (result.reachability[p] > eps) {
      if (result.core_distance[p] <= eps) {
        current = next_id++;
        raw[p] = current;
      } else {
        current = kNoise;
      }
    } else {
      raw[p] = current;
    }
  }
  return finalize(points, raw);
}

ClusterResult run_clustering(std::span<const Vec2> points, const ClusterParams& params) {
  params.validate();
  switch (params.algorithm) {
    case ClusterAlgorithm::kAgglomerative:
      return agglomerative_ward(points, params.linkage_threshold);
    case ClusterAlgorithm::kDbscan:
      return dbscan(points, params.dbscan_eps, params.dbscan_min_pts);
    case ClusterAlgorithm::kOptics:
      return extract_dbscan(optics(points, params.optics_min_pts, params.optics_eps_max), points,
                            params.optics_eps);
  }
  throw std::invalid_argument("unknown clustering algorithm");
}

std::vector<Detection> refine(const std::vector<Vec2>& positions, std::span<const uint8_t> labels,
                              const ClusterParams& params) {
  if (positions.size() != labels.size()) throw std::invalid_argument("refine: positions and labels differ in size");
  std::vector<Detection> detections;
  for (VortexClass cls : {VortexClass::kPort, VortexClass::kStarboard}) {
    std::vector<Vec2> members;
    for (size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == static_cast<uint8_t>(cls)) members.push_back(positions[i]);
    }
    if (members.empty()) continue;
    ClusterResult r = run_clustering(members, params);
    for (const auto& c : r.clusters) {
      if (c.size >= params.min_cluster_size && c.size > 0) detections.push_back({cls, c.centroid, c.size});
    }
  }
  std::sort(detections.begin(), detections.end(), [](const Detection& a, const Detection& b) {
    if (a.support != b.support) return a.support > b.support;
    if (a.center.y != b.center.y) return a.center.y < b.center.y;
    if (a.center.z != b.center.z) return a.center.z < b.center.z;
    return a.vortex_class < b.vortex_class;
  });
  return detections;
}

std::vector<Detection> refine(const PointCloud& cloud, std::span<const uint8_t> labels,
                              const ClusterParams& params) {
  std::vector<Vec2> positions(cloud.size());
  for (size_t i = 0; i < cloud.size(); ++i) positions[i] = cloud.position(i);
  return refine(positions, labels, params);
}

}  // namespace vortexseg
