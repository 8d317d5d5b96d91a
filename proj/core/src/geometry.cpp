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

#include "vortexseg/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace vortexseg {

double deg_to_rad(double deg) { return deg * (std::numbers::pi / 180.0); }
double rad_to_deg(double rad) { return rad * (180.0 / std::numbers::pi); }

void ScanGeometry::validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("ScanGeometry: " + what);
  };
  if (n_beams < 2) fail("n_beams must be >= 2");
  if (n_gates < 2) fail("n_gates must be >= 2");
  if (!std::isfinite(elevation_min) || !std::isfinite(elevation_max) ||
      !std::isfinite(range_min) || !std::isfinite(range_max)) {
    fail("non-finite bounds");
  }
  if (!(elevation_min >= 0.0 && elevation_min < elevation_max && elevation_max <= 90.0)) {
    fail("need 0 <= elevation_min < elevation_max <= 90");
  }
  if (!(range_min > 0.0 && range_min < range_max)) fail("need 0 < range_min < range_max");
}

Vec2 ScanGeometry::cell_position(CellIndex c) const {
  return polar_to_cartesian(elevation(c.beam), range(c.gate));
}

bool ScanGeometry::contains(Vec2 p, double margin) const {
  double r = p.norm();
  if (r == 0.0) return false;
  double phi = rad_to_deg(std::atan2(p.z, p.y));
  if (phi < elevation_min || phi > elevation_max) return false;
  if (r < range_min + margin || r > range_max - margin) return false;
  if (margin > 0.0) {
    if (r * std::sin(deg_to_rad(phi - elevation_min)) < margin) return false;
    if (r * std::sin(deg_to_rad(elevation_max - phi)) < margin) return false;
  }
  return true;
}

CellIndex ScanGeometry::nearest_cell(Vec2 p) const {
  double phi = rad_to_deg(std::atan2(p.z, p.y));
  double r = p.norm();
  auto clamp_index = [](double v, uint32_t n) {
    return static_cast<int64_t>(std::clamp(std::round(v), 0.0, static_cast<double>(n - 1)));
  };
  int64_t b0 = clamp_index((phi - elevation_min) / beam_spacing_deg(), n_beams);
  int64_t g0 = clamp_index((r - range_min) / gate_spacing(), n_gates);

  // The polar grid is locally close to rectangular, so the exact nearest cell
  // is always within a few indices of the rounded polar position.
  constexpr int64_t kWindow = 3;
  CellIndex best{};
  double best_d = std::numeric_limits<double>::infinity();
  for (int64_t b = std::max<int64_t>(0, b0 - kWindow);
       b <= std::min<int64_t>(n_beams - 1, b0 + kWindow); ++b) {
    for (int64_t g = std::max<int64_t>(0, g0 - kWindow);
         g <= std::min<int64_t>(n_gates - 1, g0 + kWindow); ++g) {
      CellIndex c{static_cast<uint32_t>(b), static_cast<uint32_t>(g)};
      double d = (cell_position(c) - p).norm_sq();
      if (d < best_d) {  // strict: iteration order already realizes the tie rule
        best_d = d;
        best = c;
      }
    }
  }
  return best;
}

namespace {

void check_phi(double phi_deg) {
  if (!std::isfinite(phi_deg) || phi_deg < 0.0 || phi_deg > 90.0) {
    throw std::invalid_argument("elevation angle must be finite and within [0, 90] degrees");
  }
}

}  // namespace

Vec2 polar_to_cartesian(double phi_deg, double range) {
  check_phi(phi_deg);
  if (!std::isfinite(range) || range <= 0.0) {
    throw std::invalid_argument("range must be finite and positive");
  }
  double a = deg_to_rad(phi_deg);
  return {range * std::cos(a), range * std::sin(a)};
}

Polar cartesian_to_polar(Vec2 p) {
  if (!std::isfinite(p.y) || !std::isfinite(p.z)) {
    throw std::invalid_argument("cartesian_to_polar: non-finite input");
  }
  if (p.y == 0.0 && p.z == 0.0) {
    throw std::invalid_argument("cartesian_to_polar: origin has no direction");
  }
  if (p.z < 0.0) throw std::invalid_argument("cartesian_to_polar: z must be >= 0");
  return {rad_to_deg(std::atan2(p.z, p.y)), std::hypot(p.y, p.z)};
}

Vec2 beam_unit_vector(double phi_deg) {
  check_phi(phi_deg);
  double a = deg_to_rad(phi_deg);
  return {std::cos(a), std::sin(a)};
}

}  // namespace vortexseg
