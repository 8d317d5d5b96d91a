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
#include <string>
#include <vector>

#include "vortexseg/cluster.hpp"
#include "vortexseg/dataio.hpp"
#include "vortexseg/evalx.hpp"
#include "vortexseg/segnet.hpp"
#include "vortexseg/synthgen.hpp"
#include "vortexseg/train.hpp"

namespace vortexseg {

// Everything between a raw scan and a list of detections.
struct PipelineConfig {
  size_t n_points = kDefaultPointCount;
  double label_radius = kDefaultLabelRadius;
  InputMode input_mode = InputMode::kCartesian;
  // Min-max normalize each cloud's velocities. When off, the velocity
  // feature (PointCloud::vr_norm) carries the raw value in m/s.
  bool normalize_velocity = true;
  ClusterParams cluster;
  // cluster.min_cluster_size is stated for kDefaultPointCount points and is
  // scaled proportionally for other cloud sizes when this is set. The density
  // parameters (eps, min_pts) are not scaled.
  bool scale_min_cluster_size = true;
  double d_match = kDefaultMatchDistance;
};

// min_cluster_size for a cloud of config.n_points points (never below 1).
size_t effective_min_cluster_size(const PipelineConfig& config);
ClusterParams effective_cluster_params(const PipelineConfig& config);

// Samples with the scan's own seed, labels against the scan truth,
// normalizes velocities (unless disabled), and builds the network inputs.
struct Prepared {
  PointCloud cloud;
  TrainingSample sample;
};

Prepared prepare(const LidarScan& scan, const PipelineConfig& config);

// Network inputs for an already sampled cloud.
Matrix<float> make_features(const PointCloud& cloud, InputMode mode);
Matrix<float> make_spatial(const PointCloud& cloud);

struct Detected {
  Prepared prepared;
  std::vector<uint8_t> predicted;
  std::vector<Detection> detections;
};

// Full pipeline with a trained model.
Detected detect(const ModelConfig& model, const ParamSet<float>& params, const LidarScan& scan,
                const PipelineConfig& config);
// Same pipeline with the model replaced by the truth labels.
Detected detect_oracle(const LidarScan& scan, const PipelineConfig& config);

struct DatasetEntry {
  std::string name;  // file name as listed in the manifest
  LidarScan scan;
};

// Reads every scan listed in the directory's manifest. Throws when the
// manifest is missing or lists no scans.
std::vector<DatasetEntry> load_dataset(const std::filesystem::path& dir);

// Generates `count` random scans with per-scan seeds derive_seed(seed, i).
std::vector<LidarScan> generate_scans(size_t count, uint64_t seed, const SceneConfig& scene,
                                      const ScanGeometry& geom = ScanGeometry{});

// Writes scans as scan_00000.wvls, ... followed by the manifest.
void write_dataset(const std::filesystem::path& dir, const std::vector<LidarScan>& scans);

std::vector<TrainingSample> training_set(const std::vector<DatasetEntry>& data, const PipelineConfig& config);

// Runs detect (or detect_oracle when params is null) on every scan and
// aggregates the metrics. Scans are processed in parallel; results are
// reduced in dataset order.
EvalReport evaluate(const std::vector<DatasetEntry>& data, const ModelConfig& model,
                    const ParamSet<float>* params, const PipelineConfig& config, size_t threads = 0);

}  // namespace vortexseg
