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

#include <cmath>
#include <cstddef>
#include <cstdint>

namespace vortexseg {

// Position or velocity in the vertical scan plane. y is horizontal distance
// from the instrument, z is height; the LiDAR sits at the origin.
struct Vec2 {
  double y = 0.0;
  double z = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.y + b.y, a.z + b.z}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.y - b.y, a.z - b.z}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.y, s * a.z}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;

  double dot(Vec2 o) const { return y * o.y + z * o.z; }
  double norm_sq() const { return y * y + z * z; }
  double norm() const { return std::hypot(y, z); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

struct Polar {
  double phi_deg = 0.0;
  double range = 0.0;
};

// Index of one scan cell; beam = elevation step, gate = range step.
struct CellIndex {
  uint32_t beam = 0;
  uint32_t gate = 0;
  friend bool operator==(CellIndex, CellIndex) = default;
};

// Regular polar scan grid. Beam i sits at
// elevation_min + i * (elevation_max - elevation_min) / (n_beams - 1) and gate j
// at range_min + j * (range_max - range_min) / (n_gates - 1); angles in degrees.
struct ScanGeometry {
  uint32_t n_beams = 120;
  uint32_t n_gates = 120;
  double elevation_min = 0.0;
  double elevation_max = 30.0;
  double range_min = 100.0;
  double range_max = 700.0;

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  size_t cell_count() const { return size_t{n_beams} * n_gates; }
  size_t flat_index(CellIndex c) const { return size_t{c.beam} * n_gates + c.gate; }
  CellIndex cell_at(size_t flat) const {
    return {static_cast<uint32_t>(flat / n_gates), static_cast<uint32_t>(flat % n_gates)};
  }

  double beam_spacing_deg() const { return (elevation_max - elevation_min) / (n_beams - 1); }
  double gate_spacing() const { return (range_max - range_min) / (n_gates - 1); }
  double elevation(uint32_t beam) const { return elevation_min + beam * beam_spacing_deg(); }
  double range(uint32_t gate) const { return range_min + gate * gate_spacing(); }

  Vec2 cell_position(CellIndex c) const;
  Vec2 cell_position(size_t flat) const { return cell_position(cell_at(flat)); }

  // True when p lies inside the scanned sector shrunk by `margin` meters on
  // every edge.
  bool contains(Vec2 p, double margin = 0.0) const;

  // Euclidean-nearest grid cell; ties go to the lower beam, then lower gate.
  CellIndex nearest_cell(Vec2 p) const;

  friend bool operator==(const ScanGeometry&, const ScanGeometry&) = default;
};

// y = R cos(phi), z = R sin(phi). Requires finite R > 0 and 0 <= phi <= 90.
Vec2 polar_to_cartesian(double phi_deg, double range);

// Inverse of polar_to_cartesian. Requires (y, z) != (0, 0) and z >= 0.
Polar cartesian_to_polar(Vec2 p);

// Direction of a beam at elevation phi: (cos phi, sin phi).
Vec2 beam_unit_vector(double phi_deg);

double deg_to_rad(double deg);
double rad_to_deg(double rad);

}  // namespace vortexseg
