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

#include "vortexseg/synthgen.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "vortexseg/rng.hpp"

namespace vortexseg {

void SceneSpec::validate() const {
  if (vortices.size() > kMaxVortices) {
    throw std::invalid_argument("SceneSpec: at most 3 vortices");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw std::invalid_argument("SceneSpec: noise_sigma must be >= 0");
  }
  for (const auto& v : vortices) {
    if (!(v.circulation > 0.0) || !(v.core_radius > 0.0)) {
      throw std::invalid_argument("SceneSpec: circulation and core radius must be positive");
    }
  }
}

void SceneConfig::validate() const {
  auto range_ok = [](double lo, double hi) { return std::isfinite(lo) && std::isfinite(hi) && lo <= hi; };
  if (min_vortices < 0 || max_vortices > static_cast<int>(kMaxVortices) || min_vortices > max_vortices) {
    throw std::invalid_argument("SceneConfig: vortex count range must lie within [0, 3]");
  }
  if (!range_ok(circulation_min, circulation_max) || circulation_min <= 0.0) {
    throw std::invalid_argument("SceneConfig: bad circulation range");
  }
  if (!range_ok(core_radius_min, core_radius_max) || core_radius_min <= 0.0) {
    throw std::invalid_argument("SceneConfig: bad core radius range");
  }
  if (!range_ok(separation_min, separation_max) || separation_min <= 0.0) {
    throw std::invalid_argument("SceneConfig: bad separation range");
  }
  if (!range_ok(height_min, height_max) || !range_ok(lateral_min, lateral_max)) {
    throw std::invalid_argument("SceneConfig: bad position range");
  }
  if (!(crosswind_max >= 0.0) || !(noise_sigma >= 0.0) || !(edge_margin >= 0.0) ||
      !(min_spacing >= 0.0) || max_attempts <= 0) {
    throw std::invalid_argument("SceneConfig: negative magnitude");
  }
}

double tangential_speed(double circulation, double core_radius, double r) {
  if (r <= 0.0) return 0.0;
  double r2 = r * r;
  return circulation / (2.0 * std::numbers::pi * r) * r2 / (r2 + core_radius * core_radius);
}

Vec2 induced_velocity(const SceneSpec& scene, Vec2 p) {
  Vec2 v = scene.crosswind;
  for (const auto& vortex : scene.vortices) {
    Vec2 d = p - vortex.center;
    double r = d.norm();
    if (r == 0.0) continue;
    double speed = tangential_speed(vortex.circulation, vortex.core_radius, r);
    // Counter-clockwise unit tangent is (-dz, dy) / r.
    Vec2 tangent{-d.z / r, d.y / r};
    double sense = vortex.vortex_class == VortexClass::kPort ? 1.0 : -1.0;
    v = v + (sense * speed) * tangent;
  }
  return v;
}

LidarScan synth_scan(const ScanGeometry& geom, const SceneSpec& scene) {
  geom.validate();
  scene.validate();
  for (const auto& v : scene.vortices) {
    if (!geom.contains(v.center)) {
      throw std::invalid_argument("synth_scan: vortex center (" + std::to_string(v.center.y) + ", " +
                                  std::to_string(v.center.z) + ") outside the scan sector");
    }
  }

  constexpr int kSamplesPerGate = 3;
  LidarScan scan;
  scan.geom = geom;
  scan.truth = scene.vortices;
  scan.seed = scene.seed;
  scan.vr.resize(geom.cell_count());

  SplitMix64 noise = stream_rng(scene.seed, Stream::kNoise);
  const double spacing = geom.gate_spacing();
  for (uint32_t b = 0; b < geom.n_beams; ++b) {
    Vec2 u = beam_unit_vector(geom.elevation(b));
    for (uint32_t g = 0; g < geom.n_gates; ++g) {
      double center_range = geom.range(g);
      double sum = 0.0;
      for (int s = 0; s < kSamplesPerGate; ++s) {
        // Midpoints of three equal sub-intervals of [R - dR/2, R + dR/2].
        double r = center_range + spacing * ((s + 0.5) / kSamplesPerGate - 0.5);
        sum += induced_velocity(scene, r * u).dot(u);
      }
      double value = sum / kSamplesPerGate + scene.noise_sigma * noise.normal();
      scan.vr[geom.flat_index({b, g})] = static_cast<float>(value);
    }
  }
  return scan;
}

namespace {

bool far_from_all(const std::vector<VortexSpec>& existing, Vec2 p, double spacing) {
  for (const auto& v : existing) {
    if (distance(v.center, p) < spacing) return false;
  }
  return true;
}

}  // namespace

SceneSpec random_scene(uint64_t seed, const SceneConfig& config, const ScanGeometry& geom) {
  config.validate();
  geom.validate();
  SplitMix64 rng = stream_rng(seed, Stream::kScene);

  SceneSpec scene;
  scene.seed = seed;
  scene.noise_sigma = config.noise_sigma;

  auto count = static_cast<int>(config.min_vortices +
                                rng.below(static_cast<uint64_t>(config.max_vortices - config.min_vortices + 1)));

  auto impossible = [] {
    return std::invalid_argument("random_scene: parameter ranges admit no valid scene");
  };

  if (count >= 2) {
    bool placed = false;
    for (int attempt = 0; attempt < config.max_attempts && !placed; ++attempt) {
      double separation = rng.uniform(config.separation_min, config.separation_max);
      double height = rng.uniform(config.height_min, config.height_max);
      double mid = rng.uniform(config.lateral_min, config.lateral_max);
      double circulation = rng.uniform(config.circulation_min, config.circulation_max);
      double core = rng.uniform(config.core_radius_min, config.core_radius_max);
      Vec2 port{mid + separation / 2.0, height};
      Vec2 starboard{mid - separation / 2.0, height};
      if (geom.contains(port, config.edge_margin) && geom.contains(starboard, config.edge_margin)) {
        scene.vortices.push_back({VortexClass::kPort, port, circulation, core});
        scene.vortices.push_back({VortexClass::kStarboard, starboard, circulation, core});
        placed = true;
      }
    }
    if (!placed) throw impossible();
  }

  while (static_cast<int>(scene.vortices.size()) < count) {
    bool placed = false;
    for (int attempt = 0; attempt < config.max_attempts && !placed; ++attempt) {
      VortexClass cls = rng.below(2) == 0 ? VortexClass::kPort : VortexClass::kStarboard;
      Vec2 center{rng.uniform(config.lateral_min, config.lateral_max),
                  rng.uniform(config.height_min, config.height_max)};
      double circulation = rng.uniform(config.circulation_min, config.circulation_max);
      double core = rng.uniform(config.core_radius_min, config.core_radius_max);
      if (geom.contains(center, config.edge_margin) &&
          far_from_all(scene.vortices, center, config.min_spacing)) {
        scene.vortices.push_back({cls, center, circulation, core});
        placed = true;
      }
    }
    if (!placed) throw impossible();
  }

  double wind = rng.uniform(-config.crosswind_max, config.crosswind_max);
  scene.crosswind = {wind, 0.0};
  return scene;
}

}  // namespace vortexseg
