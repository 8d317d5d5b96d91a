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
#include <vector>

#include "vortexseg/geometry.hpp"
#include "vortexseg/scan.hpp"

namespace vortexseg {

inline constexpr size_t kMaxVortices = 3;

struct SceneSpec {
  std::vector<VortexSpec> vortices;  // at most kMaxVortices
  Vec2 crosswind;                    // uniform background wind, m/s
  double noise_sigma = 0.3;          // m/s
  uint64_t seed = 0;

  void validate() const;
};

// Parameter ranges for random_scene. Centers are drawn so that they keep
// `edge_margin` meters from every sector edge; an unpaired vortex keeps
// `min_spacing` meters from every other vortex.
struct SceneConfig {
  int min_vortices = 1;
  int max_vortices = 3;
  double circulation_min = 150.0;
  double circulation_max = 450.0;
  double core_radius_min = 2.0;
  double core_radius_max = 5.0;
  double separation_min = 40.0;  // port/starboard spacing b0
  double separation_max = 60.0;
  double height_min = 60.0;
  double height_max = 150.0;
  double lateral_min = 300.0;  // y of single vortices and of pair midpoints
  double lateral_max = 620.0;
  double crosswind_max = 3.0;
  double noise_sigma = 0.3;
  double edge_margin = 30.0;
  double min_spacing = 100.0;
  int max_attempts = 2000;

  void validate() const;
};

// Burnham-Hallock tangential speed: G / (2 pi r) * r^2 / (r^2 + rc^2).
double tangential_speed(double circulation, double core_radius, double r);

// Wind at p: crosswind plus each vortex's tangential velocity. A port vortex
// turns counter-clockwise in the (y right, z up) plane, so a near-horizontal
// beam sees receding air below its center and approaching air above it;
// starboard turns the other way.
Vec2 induced_velocity(const SceneSpec& scene, Vec2 p);

// Radial velocity grid for the scene. Each gate averages the projected wind
// at three equally spaced points inside the gate interval, then adds
// N(0, noise_sigma) noise drawn in beam-major order.
LidarScan synth_scan(const ScanGeometry& geom, const SceneSpec& scene);

// Random scene: uniform vortex count in [min_vortices, max_vortices]; two or
// more vortices start with a port/starboard pair at a common height
// (port on the far side), further vortices are unpaired leftovers.
SceneSpec random_scene(uint64_t seed, const SceneConfig& config,
                       const ScanGeometry& geom = ScanGeometry{});

}  // namespace vortexseg
