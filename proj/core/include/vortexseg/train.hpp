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
#include <functional>
#include <span>
#include <vector>

#include "vortexseg/dataio.hpp"
#include "vortexseg/segnet.hpp"

namespace vortexseg {

// One preprocessed cloud ready for the network.
struct TrainingSample {
  Matrix<float> features;  // n x 3
  Matrix<float> spatial;   // n x 2, scaled (y, z)
  std::vector<uint8_t> labels;
};

struct TrainOptions {
  size_t epochs = 50;
  size_t batch_size = 4;
  double lr = 0.001;
  uint64_t seed = 0;
  size_t threads = 0;  // 0 = worker_count()
  std::function<void(size_t epoch, double mean_loss)> on_epoch;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<double> epoch_loss;  // mean batch loss per epoch
};

inline constexpr size_t kDgcnnEpochs = 50;
inline constexpr size_t kDgcnnBatch = 4;
inline constexpr size_t kPointNetEpochs = 100;
inline constexpr size_t kPointNetBatch = 16;
inline constexpr double kDefaultLearningRate = 0.001;

// Mini-batch Adam on mean cross-entropy. Each epoch visits the samples in a
// fresh shuffle; per-cloud gradients are summed in batch order and divided by
// the batch size, so results do not depend on the thread count. Throws
// std::runtime_error on a non-finite loss.
TrainResult train(std::span<const TrainingSample> data, const ModelConfig& config, const TrainOptions& options);

// Per-point class labels for one cloud.
std::vector<uint8_t> predict(const ModelConfig& config, const ParamSet<float>& params,
                             const Matrix<float>& features, const Matrix<float>& spatial);
std::vector<uint8_t> predict(const Checkpoint& ckpt, const ModelConfig& flags, const Matrix<float>& features,
                             const Matrix<float>& spatial);

// Fraction of points whose predicted label equals the target label.
double point_accuracy(std::span<const uint8_t> predicted, std::span<const uint8_t> truth);

}  // namespace vortexseg
