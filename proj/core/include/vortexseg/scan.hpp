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
#include <string_view>
#include <vector>

#include "vortexseg/geometry.hpp"

namespace vortexseg {

// Point class ids double as label values: 0 is background.
enum class VortexClass : uint8_t {
  kPort = 1,
  kStarboard = 2,
};

inline constexpr uint8_t kBackground = 0;
inline constexpr int kNumClasses = 3;

std::string_view class_name(VortexClass c);
// Throws std::invalid_argument for ids other than 1 and 2.
VortexClass vortex_class_from_id(int id);

struct VortexSpec {
  VortexClass vortex_class = VortexClass::kPort;
  Vec2 center;
  double circulation = 300.0;  // m^2/s
  double core_radius = 3.0;    // m

  friend bool operator==(const VortexSpec&, const VortexSpec&) = default;
};

// One scan: radial velocities on the polar grid, beam-major, m/s.
// Negative values point toward the instrument.
struct LidarScan {
  ScanGeometry geom;
  std::vector<float> vr;
  std::vector<VortexSpec> truth;
  uint64_t seed = 0;

  float at(CellIndex c) const { return vr[geom.flat_index(c)]; }
  float& at(CellIndex c) { return vr[geom.flat_index(c)]; }

  double mean_velocity() const;

  // Throws std::invalid_argument on dimension mismatch or non-finite values.
  void validate() const;

  friend bool operator==(const LidarScan&, const LidarScan&) = default;
};

// Sampled scan cells in structure-of-arrays form. `cell` keeps the flat grid
// index of each point so clouds stay aligned with their source scan.
struct PointCloud {
  ScanGeometry geom;
  std::vector<uint32_t> cell;
  std::vector<double> phi;    // degrees
  std::vector<double> range;  // m
  std::vector<double> y;      // m
  std::vector<double> z;      // m
  std::vector<float> vr;      // m/s
  std::vector<float> vr_norm;
  std::vector<uint8_t> label;

  size_t size() const { return cell.size(); }
  Vec2 position(size_t i) const { return {y[i], z[i]}; }
};

}  // namespace vortexseg
