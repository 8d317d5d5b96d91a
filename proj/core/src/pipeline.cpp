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

#include "vortexseg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "vortexseg/parallel.hpp"
#include "vortexseg/rng.hpp"

namespace vortexseg {

size_t effective_min_cluster_size(const PipelineConfig& config) {
  const size_t base = config.cluster.min_cluster_size;
  if (!config.scale_min_cluster_size) return std::max<size_t>(base, 1);
  // Integer ceil(base * n / kDefaultPointCount) keeps the result exact.
  size_t scaled = (base * config.n_points + kDefaultPointCount - 1) / kDefaultPointCount;
  return std::max<size_t>(scaled, 1);
}

ClusterParams effective_cluster_params(const PipelineConfig& config) {
  ClusterParams p = config.cluster;
  p.min_cluster_size = effective_min_cluster_size(config);
  return p;
}

Matrix<float> make_features(const PointCloud& cloud, InputMode mode) {
  const double scale = cloud.geom.range_max;
  Matrix<float> f(cloud.size(), kInputFeatures);
  for (size_t i = 0; i < cloud.size(); ++i) {
    if (mode == InputMode::kCartesian) {
      f(i, 0) = static_cast<float>(cloud.y[i] / scale);
      f(i, 1) = static_cast<float>(cloud.z[i] / scale);
    } else {
      f(i, 0) = static_cast<float>(cloud.phi[i] / 90.0);
      f(i, 1) = static_cast<float>(cloud.range[i] / scale);
    }
    f(i, 2) = cloud.vr_norm[i];
  }
  return f;
}

Matrix<float> make_spatial(const PointCloud& cloud) {
  const double scale = cloud.geom.range_max;
  Matrix<float> s(cloud.size(), 2);
  for (size_t i = 0; i < cloud.size(); ++i) {
    s(i, 0) = static_cast<float>(cloud.y[i] / scale);
    s(i, 1) = static_cast<float>(cloud.z[i] / scale);
  }
  return s;
}

Prepared prepare(const LidarScan& scan, const PipelineConfig& config) {
  Prepared out;
  out.cloud = label_points(sample_points(scan, config.n_points, scan.seed), scan.truth, config.label_radius);
  if (config.normalize_velocity) {
    out.cloud = normalize_velocity(std::move(out.cloud));
  } else {
    for (size_t i = 0; i < out.cloud.size(); ++i) out.cloud.vr_norm[i] = static_cast<float>(out.cloud.vr[i]);
  }
  out.sample.features = make_features(out.cloud, config.input_mode);
  out.sample.spatial = make_spatial(out.cloud);
  out.sample.labels = out.cloud.label;
  return out;
}

Detected detect(const ModelConfig& model, const ParamSet<float>& params, const LidarScan& scan,
                const PipelineConfig& config) {
  Detected out;
  out.prepared = prepare(scan, config);
  out.predicted = predict(model, params, out.prepared.sample.features, out.prepared.sample.spatial);
  out.detections = refine(out.prepared.cloud, out.predicted, effective_cluster_params(config));
  return out;
}

Detected detect_oracle(const LidarScan& scan, const PipelineConfig& config) {
  Detected out;
  out.prepared = prepare(scan, config);
  out.predicted = out.prepared.cloud.label;
  out.detections = refine(out.prepared.cloud, out.predicted, effective_cluster_params(config));
  return out;
}

std::vector<DatasetEntry> load_dataset(const std::filesystem::path& dir) {
  std::vector<std::string> files = read_manifest(dir);
  if (files.empty()) throw std::runtime_error("dataset " + dir.string() + " lists no scans");
  std::vector<DatasetEntry> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back({f, read_scan(dir / f)});
  return out;
}

std::vector<LidarScan> generate_scans(size_t count, uint64_t seed, const SceneConfig& scene,
                                      const ScanGeometry& geom) {
  std::vector<LidarScan> scans(count);
  parallel_for(count, [&](size_t i) {
    scans[i] = synth_scan(geom, random_scene(derive_seed(seed, i), scene, geom));
  });
  return scans;
}

void write_dataset(const std::filesystem::path& dir, const std::vector<LidarScan>& scans) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw FormatError(FormatError::Kind::kIo, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::string> names;
  names.reserve(scans.size());
  for (size_t i = 0; i < scans.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "scan_%05zu.wvls", i);
    write_scan(scans[i], dir / name);
    names.emplace_back(name);
  }
  write_manifest(dir, names);
}

std::vector<TrainingSample> training_set(const std::vector<DatasetEntry>& data, const PipelineConfig& config) {
  std::vector<TrainingSample> out(data.size());
  parallel_for(data.size(), [&](size_t i) { out[i] = prepare(data[i].scan, config).sample; });
  return out;
}

EvalReport evaluate(const std::vector<DatasetEntry>& data, const ModelConfig& model,
                    const ParamSet<float>* params, const PipelineConfig& config, size_t threads) {
  std::vector<ScanOutcome> outcomes(data.size());
  parallel_for(
      data.size(),
      [&](size_t i) {
        Detected d = params != nullptr ? detect(model, *params, data[i].scan, config)
                                       : detect_oracle(data[i].scan, config);
        outcomes[i] = evaluate_scan(data[i].name, data[i].scan.truth, d.detections, config.d_match);
      },
      threads);
  return metrics(std::move(outcomes));
}

}  // namespace vortexseg
