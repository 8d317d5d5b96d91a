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

#include "vortexseg/scan.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vortexseg {

std::string_view class_name(VortexClass c) {
  switch (c) {
    case VortexClass::kPort:
      return "port";
    case VortexClass::kStarboard:
      return "starboard";
  }
  return "unknown";
}

VortexClass vortex_class_from_id(int id) {
  if (id == 1) return VortexClass::kPort;
  if (id == 2) return VortexClass::kStarboard;
  throw std::invalid_argument("invalid vortex class id " + std::to_string(id));
}

double LidarScan::mean_velocity() const {
  double sum = 0.0;
  for (float v : vr) sum += v;
  return vr.empty() ? 0.0 : sum / static_cast<double>(vr.size());
}

void LidarScan::validate() const {
  geom.validate();
  if (vr.size() != geom.cell_count()) {
    throw std::invalid_argument("LidarScan: vr has " + std::to_string(vr.size()) +
                                " cells, geometry needs " + std::to_string(geom.cell_count()));
  }
  for (float v : vr) {
    if (!std::isfinite(v)) throw std::invalid_argument("LidarScan: non-finite radial velocity");
  }
}

}  // namespace vortexseg
