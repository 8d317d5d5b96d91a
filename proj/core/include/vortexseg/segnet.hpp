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
#include <span>
#include <string>
#include <vector>

#include "vortexseg/dataio.hpp"
#include "vortexseg/graph.hpp"
#include "vortexseg/nn_ops.hpp"
#include "vortexseg/tensor.hpp"

namespace vortexseg {

// Per-point model inputs. Cartesian: (y, z) / range_max plus vr_norm.
// Polar: (phi / 90, range / range_max) plus vr_norm.
enum class InputMode {
  kCartesian,
  kPolar,
};

inline constexpr size_t kInputFeatures = 3;

struct ModelConfig {
  Arch arch = Arch::kDgcnn;
  size_t k = kDefaultK;
  size_t n_classes = 3;
  bool dynamic_graph = true;
  InputMode input_mode = InputMode::kCartesian;
  // DGCNN: EdgeConv output widths. PointNet: shared-MLP widths.
  std::vector<size_t> feature_widths = {64, 64, 128};
  // DGCNN only: width of the fused per-point layer that is max-pooled.
  size_t global_width = 512;
  std::vector<size_t> head_widths = {256, 128};

  static ModelConfig dgcnn();
  static ModelConfig pointnet();

  void validate() const;
};

// One named parameter: a d_in x d_out weight or a length-d_out bias
// (rows == 1 for biases, `is_bias` set).
template <typename T>
struct Param {
  std::string name;
  Matrix<T> value;
  bool is_bias = false;
};

template <typename T>
struct ParamSet {
  std::vector<Param<T>> params;

  // Same names and shapes, all zeros.
  ParamSet zeros_like() const;
  size_t scalar_count() const;
  const Param<T>& at(std::string_view name) const;
};

// Parameter names and shapes for a configuration, in canonical order.
std::vector<std::pair<std::string, std::pair<size_t, size_t>>> parameter_layout(const ModelConfig& config);

// Xavier-uniform weights drawn from the init sub-stream of `seed` in layout
// order; zero biases.
ParamSet<float> initialize_params(const ModelConfig& config, uint64_t seed);

template <typename To, typename From>
ParamSet<To> cast_params(const ParamSet<From>& p) {
  ParamSet<To> out;
  for (const auto& q : p.params) out.params.push_back({q.name, cast_matrix<To>(q.value), q.is_bias});
  return out;
}

Checkpoint to_checkpoint(const ModelConfig& config, const ParamSet<float>& params);
// Widths are recovered from the tensor shapes; runtime flags come from `flags`.
ModelConfig config_from_checkpoint(const Checkpoint& ckpt, const ModelConfig& flags = ModelConfig{});
ParamSet<float> params_from_checkpoint(const Checkpoint& ckpt, const ModelConfig& config);

// Everything the backward pass needs from one forward pass.
template <typename T>
struct ForwardCache {
  Matrix<T> input;
  std::vector<KnnGraph> graphs;
  std::vector<Matrix<T>> feature_in;   // per EdgeConv / shared-MLP layer input
  std::vector<Matrix<T>> feature_pre;  // shared-MLP pre-activations (PointNet)
  std::vector<nn::EdgeConvCache<T>> edge;
  Matrix<T> local;       // concatenated per-point features fed to the head
  Matrix<T> fuse_pre;    // DGCNN fused layer pre-activation
  Matrix<T> pooled_from;
  std::vector<T> global;
  std::vector<uint32_t> global_argmax;
  std::vector<Matrix<T>> head_in;
  std::vector<Matrix<T>> head_pre;
};

// Per-point logits, n x n_classes. `features` is n x 3; `spatial` is n x 2
// scaled (y, z) and is used for the graph when dynamic_graph is off.
template <typename T>
Matrix<T> forward(const ModelConfig& config, const ParamSet<T>& params, const Matrix<T>& features,
                  const Matrix<T>& spatial, ForwardCache<T>* cache = nullptr);

// Accumulates parameter gradients of sum(dlogits * logits) into `grads`.
template <typename T>
void backward(const ModelConfig& config, const ParamSet<T>& params, const ForwardCache<T>& cache,
              const Matrix<T>& dlogits, ParamSet<T>& grads);

// Argmax per point; ties go to the lower class id.
std::vector<uint8_t> argmax_labels(const Matrix<float>& logits);

struct AdamState {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  uint64_t t = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

template <typename T>
AdamState make_adam_state(const ParamSet<T>& params, double lr = 0.001);

// One bias-corrected Adam update.
template <typename T>
void adam_step(ParamSet<T>& params, const ParamSet<T>& grads, AdamState& state);

}  // namespace vortexseg
