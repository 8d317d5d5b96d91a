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

#include <benchmark/benchmark.h>

#include <vector>

#include "vortexseg/cluster.hpp"
#include "vortexseg/graph.hpp"
#include "vortexseg/pipeline.hpp"
#include "vortexseg/segnet.hpp"
#include "vortexseg/synthgen.hpp"
#include "vortexseg/train.hpp"

namespace vortexseg {
namespace {

const LidarScan& sample_scan() {
  static const LidarScan scan = generate_scans(1, 42, SceneConfig{})[0];
  return scan;
}

Prepared prepared_cloud(size_t n) {
  PipelineConfig pc;
  pc.n_points = n;
  return prepare(sample_scan(), pc);
}

std::vector<double> scan_xy(size_t n) {
  PointCloud cloud = sample_points(sample_scan(), n, 7);
  std::vector<double> xy;
  for (size_t i = 0; i < n; ++i) {
    xy.push_back(cloud.y[i]);
    xy.push_back(cloud.z[i]);
  }
  return xy;
}

void BM_SynthScan(benchmark::State& state) {
  SceneSpec spec;
  spec.seed = 3;
  spec.vortices = sample_scan().truth;
  for (auto _ : state) benchmark::DoNotOptimize(synth_scan(ScanGeometry{}, spec));
}
BENCHMARK(BM_SynthScan)->Unit(benchmark::kMillisecond);

void BM_KnnGrid(benchmark::State& state) {
  const auto n = static_cast<size_t>(state.range(0));
  std::vector<double> xy = scan_xy(n);
  for (auto _ : state) benchmark::DoNotOptimize(knn_grid(xy, n, kDefaultK));
}
BENCHMARK(BM_KnnGrid)->Arg(1024)->Arg(12000)->Unit(benchmark::kMillisecond);

void BM_KnnBruteforce(benchmark::State& state) {
  const auto n = static_cast<size_t>(state.range(0));
  std::vector<double> xy = scan_xy(n);
  for (auto _ : state) benchmark::DoNotOptimize(knn_bruteforce(xy, n, 2, kDefaultK));
}
BENCHMARK(BM_KnnBruteforce)->Arg(1024)->Arg(12000)->Unit(benchmark::kMillisecond);

void BM_Forward(benchmark::State& state) {
  ModelConfig config = state.range(1) == 0 ? ModelConfig::dgcnn() : ModelConfig::pointnet();
  ParamSet<float> params = initialize_params(config, 1);
  Prepared p = prepared_cloud(static_cast<size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(config, params, p.sample.features, p.sample.spatial));
  }
  state.SetLabel(std::string(arch_name(config.arch)));
}
BENCHMARK(BM_Forward)->Args({1024, 0})->Args({1024, 1})->Args({12000, 0})->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  ModelConfig config = ModelConfig::dgcnn();
  Prepared p = prepared_cloud(static_cast<size_t>(state.range(0)));
  std::vector<TrainingSample> data(4, p.sample);
  TrainOptions options;
  options.epochs = 1;
  options.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train(data, config, options));
}
BENCHMARK(BM_TrainStep)->Arg(1024)->Unit(benchmark::kMillisecond);

std::vector<Vec2> foreground_points() {
  Prepared p = prepared_cloud(kDefaultPointCount);
  std::vector<Vec2> pts;
  for (size_t i = 0; i < p.cloud.label.size(); ++i) {
    if (p.cloud.label[i] != 0) pts.push_back({p.cloud.y[i], p.cloud.z[i]});
  }
  return pts;
}

void BM_Cluster(benchmark::State& state) {
  std::vector<Vec2> pts = foreground_points();
  ClusterParams params;
  for (auto _ : state) {
    switch (state.range(0)) {
      case 0:
        benchmark::DoNotOptimize(agglomerative_ward(pts, params.linkage_threshold));
        break;
      case 1:
        benchmark::DoNotOptimize(dbscan(pts, params.dbscan_eps, params.dbscan_min_pts));
        break;
      default:
        benchmark::DoNotOptimize(
            extract_dbscan(optics(pts, params.optics_min_pts, params.optics_eps_max), pts, params.optics_eps));
    }
  }
  static constexpr const char* kNames[] = {"ward", "dbscan", "optics"};
  state.SetLabel(std::string(kNames[state.range(0)]) + ", " + std::to_string(pts.size()) + " points");
}
BENCHMARK(BM_Cluster)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace vortexseg

BENCHMARK_MAIN();
