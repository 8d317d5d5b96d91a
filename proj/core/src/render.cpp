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

#include "vortexseg/render.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "vortexseg/dataio.hpp"

namespace vortexseg {

Image::Image(uint32_t w, uint32_t h, Rgb fill) : width(w), height(h), rgb(size_t{w} * h * 3) {
  for (size_t i = 0; i < size_t{w} * h; ++i) std::copy(fill.begin(), fill.end(), rgb.begin() + 3 * i);
}

Rgb Image::pixel(uint32_t x, uint32_t y) const {
  size_t o = (size_t{y} * width + x) * 3;
  return {rgb[o], rgb[o + 1], rgb[o + 2]};
}

void Image::set(uint32_t x, uint32_t y, Rgb c) {
  size_t o = (size_t{y} * width + x) * 3;
  rgb[o] = c[0];
  rgb[o + 1] = c[1];
  rgb[o + 2] = c[2];
}

namespace {

uint8_t blend_channel(uint8_t from, uint8_t to, double s) {
  double v = std::floor(from + (to - from) * s + 0.5);
  return static_cast<uint8_t>(std::clamp(v, 0.0, 255.0));
}

Rgb blend(Rgb from, Rgb to, double s) {
  return {blend_channel(from[0], to[0], s), blend_channel(from[1], to[1], s), blend_channel(from[2], to[2], s)};
}

}  // namespace

Rgb diverging_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  if (t <= 0.5) return blend(kBlue, kWhite, t / 0.5);
  return blend(kWhite, kRed, (t - 0.5) / 0.5);
}

Image render_velocity(const LidarScan& scan) {
  scan.validate();
  const ScanGeometry& g = scan.geom;
  auto [lo, hi] = std::minmax_element(scan.vr.begin(), scan.vr.end());
  const double vmin = *lo;
  const double vmax = *hi;
  Image img(g.n_gates, g.n_beams);
  for (uint32_t b = 0; b < g.n_beams; ++b) {
    for (uint32_t j = 0; j < g.n_gates; ++j) {
      double t = vmax == vmin ? 0.5 : (scan.at({b, j}) - vmin) / (vmax - vmin);
      img.set(j, b, diverging_color(t));
    }
  }
  return img;
}

Image render_segmentation(const PointCloud& cloud, std::span<const uint8_t> labels,
                          std::span<const Detection> detections) {
  if (labels.size() != cloud.size()) throw std::invalid_argument("render_segmentation: label count mismatch");
  const ScanGeometry& g = cloud.geom;
  Image img(g.n_gates, g.n_beams);
  for (size_t i = 0; i < cloud.size(); ++i) {
    CellIndex c = g.cell_at(cloud.cell[i]);
    Rgb color = labels[i] == static_cast<uint8_t>(VortexClass::kPort)        ? kBlue
                : labels[i] == static_cast<uint8_t>(VortexClass::kStarboard) ? kRed
                                                                              : kGray;
    img.set(c.gate, c.beam, color);
  }
  for (const auto& d : detections) {
    CellIndex c = g.nearest_cell(d.center);
    for (int o = -2; o <= 2; ++o) {
      int64_t x = int64_t{c.gate} + o;
      int64_t y = int64_t{c.beam} + o;
      if (x >= 0 && x < g.n_gates) img.set(static_cast<uint32_t>(x), c.beam, kBlack);
      if (y >= 0 && y < g.n_beams) img.set(c.gate, static_cast<uint32_t>(y), kBlack);
    }
  }
  return img;
}

Image hconcat(std::span<const Image> panels, uint32_t gap) {
  if (panels.empty()) return {};
  uint32_t width = 0;
  uint32_t height = 0;
  for (const auto& p : panels) {
    width += p.width;
    height = std::max(height, p.height);
  }
  width += gap * static_cast<uint32_t>(panels.size() - 1);
  Image out(width, height);
  uint32_t x0 = 0;
  for (const auto& p : panels) {
    for (uint32_t y = 0; y < p.height; ++y) {
      for (uint32_t x = 0; x < p.width; ++x) out.set(x0 + x, y, p.pixel(x, y));
    }
    x0 += p.width + gap;
  }
  return out;
}

std::vector<uint8_t> encode_ppm(const Image& image) {
  if (image.rgb.size() != size_t{image.width} * image.height * 3) {
    throw std::invalid_argument("encode_ppm: pixel buffer does not match dimensions");
  }
  std::string header = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.rgb.begin(), image.rgb.end());
  return out;
}

void write_ppm(const Image& image, const std::filesystem::path& path) {
  write_file_bytes(path, encode_ppm(image));
}

}  // namespace vortexseg
