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
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vortexseg/scan.hpp"

namespace vortexseg {

inline constexpr size_t kDefaultPointCount = 12000;
inline constexpr double kDefaultLabelRadius = 25.0;

// Draws n distinct cells uniformly without replacement (partial Fisher-Yates
// over flat cell indices, sampling sub-stream of `seed`). Labels are left at
// background and vr_norm at zero.
PointCloud sample_points(const LidarScan& scan, size_t n, uint64_t seed);

// Each point takes the class of the nearest truth vortex within r_label
// (inclusive); equal distances go to port. Others become background.
PointCloud label_points(PointCloud cloud, std::span<const VortexSpec> truth,
                        double r_label = kDefaultLabelRadius);

// Per-cloud min-max scaling of vr into [0, 1]; a constant cloud maps to 0.5.
PointCloud normalize_velocity(PointCloud cloud);

// --- Binary formats --------------------------------------------------------

class FormatError : public std::runtime_error {
 public:
  enum class Kind {
    kIo,
    kBadMagic,
    kVersionMismatch,
    kTruncated,
    kInvalid,
  };

  FormatError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr uint32_t kScanFormatVersion = 1;
inline constexpr uint32_t kCheckpointFormatVersion = 1;

enum class Arch : uint8_t {
  kDgcnn = 1,
  kPointNet = 2,
};

std::string_view arch_name(Arch arch);
Arch arch_from_name(std::string_view name);

struct NamedTensor {
  std::string name;
  std::vector<uint32_t> shape;
  std::vector<float> data;  // row-major

  size_t element_count() const;
  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

struct Checkpoint {
  Arch arch = Arch::kDgcnn;
  uint16_t k = 20;
  uint16_t n_classes = 3;
  std::vector<NamedTensor> tensors;

  const NamedTensor* find(std::string_view name) const;
  // Unique names and data sizes that match the declared shapes.
  void validate() const;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

// "WVLS" v1, little-endian.
std::vector<uint8_t> encode_scan(const LidarScan& scan);
LidarScan decode_scan(std::span<const uint8_t> bytes);
void write_scan(const LidarScan& scan, const std::filesystem::path& path);
LidarScan read_scan(const std::filesystem::path& path);

// "WVCK" v1, little-endian.
std::vector<uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const uint8_t> bytes);
void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// A dataset is a directory holding .wvls files plus a "manifest.txt" with one
// file name per line (LF endings).
inline constexpr const char* kManifestName = "manifest.txt";

void write_manifest(const std::filesystem::path& dir, const std::vector<std::string>& files);
std::vector<std::string> read_manifest(const std::filesystem::path& dir);

std::vector<uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const uint8_t> bytes);

}  // namespace vortexseg
