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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vortexseg/pipeline.hpp"

namespace vortexseg {

enum class PerturbMethod {
  kMask,
  kMove,
  kSwap,
};

std::string_view method_name(PerturbMethod m);
PerturbMethod method_from_name(std::string_view name);  // "mask", "move", "swap"

inline constexpr double kDefaultPerturbRadius = 25.0;

struct PerturbationSpec {
  PerturbMethod method = PerturbMethod::kMask;
  double radius = kDefaultPerturbRadius;
  Vec2 target_center;
  std::optional<Vec2> destination;    // move only
  std::optional<Vec2> second_center;  // swap only

  // Throws std::invalid_argument when a required field is missing, a center
  // lies outside the sector, a disk holds no cell, or swap disks overlap.
  void validate(const ScanGeometry& geom) const;
};

// Flat indices of the cells whose centers lie within `radius` of `center`,
// ascending (beam-major).
std::vector<size_t> disk_cells(const ScanGeometry& geom, Vec2 center, double radius);

// Sets every in-disk cell to `fill`.
LidarScan mask_core(const LidarScan& scan, Vec2 center, double radius, float fill);
// Sets every in-disk cell to the scan's mean radial velocity.
LidarScan mask_core(const LidarScan& scan, Vec2 center, double radius);

// Copies the source disk to the destination (nearest cell to p + delta; later
// writes win in beam-major order), then fills the source cells that received
// no copy with the pre-perturbation scan mean.
LidarScan move_core(const LidarScan& scan, Vec2 center, double radius, Vec2 destination);

// Exchanges each cell at offset o from `a` with the cell nearest b + o, then
// pairs the still unpaired cells of disk b the same way in reverse. Only
// in-disk partners are used and every cell is exchanged at most once, so the
// value multiset of the two disks is preserved and the pairing depends on
// geometry alone (applying the swap twice restores the scan).
LidarScan swap_cores(const LidarScan& scan, Vec2 a, Vec2 b, double radius);

LidarScan apply_perturbation(const LidarScan& scan, const PerturbationSpec& spec);

struct ExplainThresholds {
  double suppression = 0.8;  // relative drop of the in-disk target fraction
  double ring_retention = 0.5;
  double d_match = kDefaultMatchDistance;
};

// Predicted-class point fractions inside one region.
struct RegionResponse {
  std::string name;
  size_t points = 0;  // sampled points in the region (same before and after)
  std::array<double, kNumClasses> before{};
  std::array<double, kNumClasses> after{};
};

struct DetectionChange {
  enum class Kind { kKept, kAppeared, kVanished };
  Kind kind = Kind::kKept;
  VortexClass vortex_class = VortexClass::kPort;
  Vec2 before;  // unset for kAppeared
  Vec2 after;   // unset for kVanished
  double shift = 0.0;
};

struct ExplainReport {
  PerturbationSpec spec;
  std::optional<VortexClass> target_class;
  std::optional<VortexClass> second_class;  // swap only
  std::vector<RegionResponse> regions;
  std::vector<Detection> detections_before;
  std::vector<Detection> detections_after;
  std::vector<DetectionChange> changes;
  bool masked_core_suppressed = false;
  bool surrounding_ring_retained = false;
  bool relocated_core_detected = false;
  bool swap_intermingled = false;

  const RegionResponse* region(std::string_view name) const;
};

// Class whose core sits at `center`: the nearest truth vortex within
// `radius`, otherwise the most frequent predicted vortex class in the disk.
std::optional<VortexClass> region_class(const LidarScan& scan, const PointCloud& cloud,
                                        std::span<const uint8_t> predicted, Vec2 center, double radius);

// Runs the pipeline on the original and perturbed scans with identical
// sampling and compares the predictions.
struct ExplainRun {
  ExplainReport report;
  LidarScan perturbed;
  Detected before;
  Detected after;
};

ExplainRun explain(const ModelConfig& model, const ParamSet<float>& params, const LidarScan& scan,
                   const PerturbationSpec& spec, const PipelineConfig& config,
                   const ExplainThresholds& thresholds = {});

// A destination for moving a core at `center`: same elevation, shifted in
// range (outward first, by 150 m, then other shifts), inside the sector with
// `radius` to spare and at least d_avoid from every point in `avoid`.
std::optional<Vec2> choose_move_destination(const ScanGeometry& geom, Vec2 center, double radius,
                                            std::span<const Vec2> avoid, double d_avoid);

// Perturbation aimed at the strongest detection. Move picks a destination
// with choose_move_destination; swap pairs the strongest detection with the
// nearest detection of the other class. Returns nothing when no suitable
// target exists.
std::optional<PerturbationSpec> auto_spec(PerturbMethod method, const LidarScan& scan,
                                          std::span<const Detection> detections, double radius,
                                          double d_match = kDefaultMatchDistance);

// Line-oriented "key<TAB>value" report.
std::string format_report(const ExplainReport& report);

}  // namespace vortexseg
