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

#include "vortexseg/train.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "vortexseg/parallel.hpp"
#include "vortexseg/rng.hpp"

namespace vortexseg {

TrainResult train(std::span<const TrainingSample> data, const ModelConfig& config, const TrainOptions& options) {
  config.validate();
  if (data.empty()) throw std::invalid_argument("train: empty dataset");
  if (options.batch_size == 0) throw std::invalid_argument("train: batch size must be positive");
  for (const auto& s : data) {
    if (s.features.rows != s.labels.size() || s.features.cols != kInputFeatures) {
      throw std::invalid_argument("train: sample features and labels disagree");
    }
  }

  ParamSet<float> params = initialize_params(config, options.seed);
  AdamState adam = make_adam_state(params, options.lr);
  SplitMix64 shuffle_rng = stream_rng(options.seed, Stream::kShuffle);
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), size_t{0});

  TrainResult result;
  for (size_t epoch = 0; epoch < options.epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i) {
      size_t j = shuffle_rng.below(i);
      std::swap(order[i - 1], order[j]);
    }

    double loss_sum = 0.0;
    size_t batches = 0;
    for (size_t start = 0; start < order.size(); start += options.batch_size) {
      const size_t count = std::min(options.batch_size, order.size() - start);
      std::vector<ParamSet<float>> grads(count);
      std::vector<double> losses(count);
      parallel_for(
          count,
          [&](size_t b) {
            const TrainingSample& s = data[order[start + b]];
            ForwardCache<float> cache;
            Matrix<float> logits = forward(config, params, s.features, s.spatial, &cache);
            auto ce = nn::softmax_cross_entropy(logits, s.labels);
            losses[b] = ce.loss;
            grads[b] = params.zeros_like();
            backward(config, params, cache, ce.grad, grads[b]);
          },
          options.threads);

      ParamSet<float> total = params.zeros_like();
      double batch_loss = 0.0;
      for (size_t b = 0; b < count; ++b) {
        batch_loss += losses[b];
        for (size_t p = 0; p < total.params.size(); ++p) {
          auto& acc = total.params[p].value.data;
          const auto& g = grads[b].params[p].value.data;
          for (size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
        }
      }
      batch_loss /= static_cast<double>(count);
      if (!std::isfinite(batch_loss)) {
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                                 std::to_string(batches + 1));
      }
      const float scale = 1.0f / static_cast<float>(count);
      for (auto& p : total.params) {
        for (auto& v : p.value.data) v *= scale;
      }
      adam_step(params, total, adam);
      loss_sum += batch_loss;
      ++batches;
    }
    double mean = loss_sum / static_cast<double>(batches);
    result.epoch_loss.push_back(mean);
    if (options.on_epoch) options.on_epoch(epoch + 1, mean);
  }
  result.checkpoint = to_checkpoint(config, params);
  return result;
}

std::vector<uint8_t> predict(const ModelConfig& config, const ParamSet<float>& params,
                             const Matrix<float>& features, const Matrix<float>& spatial) {
  return argmax_labels(forward(config, params, features, spatial));
}

std::vector<uint8_t> predict(const Checkpoint& ckpt, const ModelConfig& flags, const Matrix<float>& features,
                             const Matrix<float>& spatial) {
  ModelConfig config = config_from_checkpoint(ckpt, flags);
  return predict(config, params_from_checkpoint(ckpt, config), features, spatial);
}

double point_accuracy(std::span<const uint8_t> predicted, std::span<const uint8_t> truth) {
  if (predicted.size() != truth.size() || truth.empty()) {
    throw std::invalid_argument("point_accuracy: size mismatch");
  }
  size_t hit = 0;
  for (size_t i = 0; i < truth.size(); ++i) hit += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

}  // namespace vortexseg
