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

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vortexseg/cluster.hpp"
#include "vortexseg/scan.hpp"

namespace vortexseg {

using Rgb = std::array<uint8_t, 3>;

inline constexpr Rgb kBlue = {0, 0, 255};
inline constexpr Rgb kWhite = {255, 255, 255};
inline constexpr Rgb kRed = {255, 0, 0};
inline constexpr Rgb kBlack = {0, 0, 0};
inline constexpr Rgb kGray = {128, 128, 128};

struct Image {
  uint32_t width = 0;
  uint32_t height = 0;
  std::vector<uint8_t> rgb;  // row-major, 3 bytes per pixel

  Image() = default;
  Image(uint32_t w, uint32_t h, Rgb fill = kWhite);
  Rgb pixel(uint32_t x, uint32_t y) const;
  void set(uint32_t x, uint32_t y, Rgb c);
  friend bool operator==(const Image&, const Image&) = default;
};

// Diverging map on t in [0, 1]: blue -> white at 0.5 -> red, each channel
// rounded half up.
Rgb diverging_color(double t);

// Column j = gate j, row i = beam i. t = (vr - min) / (max - min); a constant
// scan maps to t = 0.5.
Image render_velocity(const LidarScan& scan);

// Sampled cells colored by class (background gray, port blue, starboard
// red), unsampled cells white, detections marked by a 5x5 black plus at the
// nearest cell.
Image render_segmentation(const PointCloud& cloud, std::span<const uint8_t> labels,
                          std::span<const Detection> detections = {});

// Side-by-side panels separated by `gap` white columns; shorter panels are
// padded with white at the bottom.
Image hconcat(std::span<const Image> panels, uint32_t gap = 4);

std::vector<uint8_t> encode_ppm(const Image& image);  // binary P6, maxval 255
void write_ppm(const Image& image, const std::filesystem::path& path);

}  // namespace vortexseg
