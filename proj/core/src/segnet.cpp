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

#include "vortexseg/segnet.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "vortexseg/rng.hpp"

namespace vortexseg {

ModelConfig ModelConfig::dgcnn() { return ModelConfig{}; }

ModelConfig ModelConfig::pointnet() {
  ModelConfig c;
  c.arch = Arch::kPointNet;
  c.feature_widths = {64, 128, 256};
  c.global_width = 0;
  return c;
}

void ModelConfig::validate() const {
  if (k < 1) throw std::invalid_argument("ModelConfig: k must be >= 1");
  if (n_classes < 2) throw std::invalid_argument("ModelConfig: need at least two classes");
  if (feature_widths.empty()) throw std::invalid_argument("ModelConfig: no feature layers");
  for (size_t w : feature_widths) {
    if (w == 0) throw std::invalid_argument("ModelConfig: widths must be positive");
  }
  for (size_t w : head_widths) {
    if (w == 0) throw std::invalid_argument("ModelConfig: widths must be positive");
  }
  if (arch == Arch::kDgcnn && global_width == 0) {
    throw std::invalid_argument("ModelConfig: DGCNN needs a positive global width");
  }
}

namespace {

std::string layer_prefix(const ModelConfig& config) { return config.arch == Arch::kDgcnn ? "edge" : "mlp"; }

size_t local_width(const ModelConfig& config) {
  if (config.arch == Arch::kPointNet) return config.feature_widths.back();
  size_t sum = 0;
  for (size_t w : config.feature_widths) sum += w;
  return sum;
}

size_t pooled_width(const ModelConfig& config) {
  return config.arch == Arch::kDgcnn ? config.global_width : config.feature_widths.back();
}

// Offsets of each layer's weight in canonical layout order; the bias follows.
struct LayerIndex {
  size_t n_features;
  size_t fuse;  // DGCNN only
  size_t head_begin;
  size_t n_head;

  explicit LayerIndex(const ModelConfig& c)
      : n_features(c.feature_widths.size()),
        fuse(2 * n_features),
        head_begin(2 * n_features + (c.arch == Arch::kDgcnn ? 2 : 0)),
        n_head(c.head_widths.size() + 1) {}

  size_t feature(size_t l) const { return 2 * l; }
  size_t head(size_t h) const { return head_begin + 2 * h; }
};

template <typename T>
std::span<const T> bias(const ParamSet<T>& p, size_t weight_index) {
  return p.params[weight_index + 1].value.data;
}

template <typename T>
std::span<T> bias(ParamSet<T>& p, size_t weight_index) {
  return p.params[weight_index + 1].value.data;
}

template <typename T>
const Matrix<T>& weight(const ParamSet<T>& p, size_t weight_index) {
  return p.params[weight_index].value;
}

template <typename T>
Matrix<T>& weight(ParamSet<T>& p, size_t weight_index) {
  return p.params[weight_index].value;
}

template <typename T>
KnnGraph build_graph(const Matrix<T>& x, size_t k) {
  return knn_bruteforce(std::span<const T>(x.data), x.rows, x.cols, k);
}

template <typename T>
Matrix<T> concat_columns(const std::vector<Matrix<T>>& parts) {
  size_t cols = 0;
  for (const auto& p : parts) cols += p.cols;
  Matrix<T> out(parts.front().rows, cols);
  for (size_t i = 0; i < out.rows; ++i) {
    T* dst = out.row(i);
    for (const auto& p : parts) {
      std::copy(p.row(i), p.row(i) + p.cols, dst);
      dst += p.cols;
    }
  }
  return out;
}

template <typename T>
Matrix<T> column_slice(const Matrix<T>& m, size_t begin, size_t width) {
  Matrix<T> out(m.rows, width);
  for (size_t i = 0; i < m.rows; ++i) std::copy(m.row(i) + begin, m.row(i) + begin + width, out.row(i));
  return out;
}

template <typename T>
void add_into(Matrix<T>& acc, const Matrix<T>& x) {
  for (size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += x.data[i];
}

}  // namespace

std::vector<std::pair<std::string, std::pair<size_t, size_t>>> parameter_layout(const ModelConfig& config) {
  config.validate();
  std::vector<std::pair<std::string, std::pair<size_t, size_t>>> layout;
  auto add = [&](const std::string& name, size_t in, size_t out) {
    layout.push_back({name + ".weight", {in, out}});
    layout.push_back({name + ".bias", {1, out}});
  };
  const std::string prefix = layer_prefix(config);
  size_t in = kInputFeatures;
  for (size_t l = 0; l < config.feature_widths.size(); ++l) {
    size_t w = config.feature_widths[l];
    add(prefix + std::to_string(l + 1), config.arch == Arch::kDgcnn ? 2 * in : in, w);
    in = w;
  }
  if (config.arch == Arch::kDgcnn) add("fuse", local_width(config), config.global_width);
  in = local_width(config) + pooled_width(config);
  for (size_t h = 0; h < config.head_widths.size(); ++h) {
    add("head" + std::to_string(h + 1), in, config.head_widths[h]);
    in = config.head_widths[h];
  }
  add("head" + std::to_string(config.head_widths.size() + 1), in, config.n_classes);
  return layout;
}

template <typename T>
ParamSet<T> ParamSet<T>::zeros_like() const {
  ParamSet<T> out;
  for (const auto& p : params) out.params.push_back({p.name, Matrix<T>(p.value.rows, p.value.cols), p.is_bias});
  return out;
}

template <typename T>
size_t ParamSet<T>::scalar_count() const {
  size_t n = 0;
  for (const auto& p : params) n += p.value.size();
  return n;
}

template <typename T>
const Param<T>& ParamSet<T>::at(std::string_view name) const {
  for (const auto& p : params) {
    if (p.name == name) return p;
  }
  throw std::out_of_range("no parameter named " + std::string(name));
}

template struct ParamSet<float>;
template struct ParamSet<double>;

ParamSet<float> initialize_params(const ModelConfig& config, uint64_t seed) {
  SplitMix64 rng = stream_rng(seed, Stream::kInit);
  ParamSet<float> out;
  for (const auto& [name, shape] : parameter_layout(config)) {
    bool is_bias = name.ends_with(".bias");
    Matrix<float> m(shape.first, shape.second);
    if (!is_bias) {
      double limit = std::sqrt(6.0 / static_cast<double>(shape.first + shape.second));
      for (auto& v : m.data) v = static_cast<float>(rng.uniform(-limit, limit));
    }
    out.params.push_back({name, std::move(m), is_bias});
  }
  return out;
}

Checkpoint to_checkpoint(const ModelConfig& config, const ParamSet<float>& params) {
  config.validate();
  Checkpoint ckpt;
  ckpt.arch = config.arch;
  ckpt.k = static_cast<uint16_t>(config.k);
  ckpt.n_classes = static_cast<uint16_t>(config.n_classes);
  for (const auto& p : params.params) {
    NamedTensor t;
    t.name = p.name;
    if (p.is_bias) {
      t.shape = {static_cast<uint32_t>(p.value.cols)};
    } else {
      t.shape = {static_cast<uint32_t>(p.value.rows), static_cast<uint32_t>(p.value.cols)};
    }
    t.data = p.value.data;
    ckpt.tensors.push_back(std::move(t));
  }
  return ckpt;
}

ModelConfig config_from_checkpoint(const Checkpoint& ckpt, const ModelConfig& flags) {
  ckpt.validate();
  ModelConfig c;
  c.arch = ckpt.arch;
  c.k = ckpt.k;
  c.n_classes = ckpt.n_classes;
  c.dynamic_graph = flags.dynamic_graph;
  c.input_mode = flags.input_mode;
  c.feature_widths.clear();
  c.head_widths.clear();
  c.global_width = 0;

  auto out_width = [&](const std::string& name) -> std::optional<size_t> {
    const NamedTensor* t = ckpt.find(name);
    if (t == nullptr || t->shape.size() != 2) return std::nullopt;
    return t->shape[1];
  };
  const std::string prefix = ckpt.arch == Arch::kDgcnn ? "edge" : "mlp";
  for (size_t l = 1; auto w = out_width(prefix + std::to_string(l) + ".weight"); ++l) c.feature_widths.push_back(*w);
  if (ckpt.arch == Arch::kDgcnn) {
    auto w = out_width("fuse.weight");
    if (!w) throw std::invalid_argument("checkpoint: missing fuse.weight");
    c.global_width = *w;
  }
  std::vector<size_t> head;
  for (size_t h = 1; auto w = out_width("head" + std::to_string(h) + ".weight"); ++h) head.push_back(*w);
  if (head.empty() || head.back() != c.n_classes) {
    throw std::invalid_argument("checkpoint: head does not end in n_classes outputs");
  }
  head.pop_back();
  c.head_widths = head;
  if (c.feature_widths.empty()) throw std::invalid_argument("checkpoint: no feature layers");

  // Full shape check against the recovered layout.
  auto layout = parameter_layout(c);
  if (layout.size() != ckpt.tensors.size()) {
    throw std::invalid_argument("checkpoint: tensor count does not match the architecture");
  }
  for (const auto& [name, shape] : layout) {
    const NamedTensor* t = ckpt.find(name);
    bool is_bias = name.ends_with(".bias");
    bool ok = t != nullptr &&
              (is_bias ? (t->shape.size() == 1 && t->shape[0] == shape.second)
                       : (t->shape.size() == 2 && t->shape[0] == shape.first && t->shape[1] == shape.second));
    if (!ok) throw std::invalid_argument("checkpoint: tensor '" + name + "' missing or misshapen");
  }
  return c;
}

ParamSet<float> params_from_checkpoint(const Checkpoint& ckpt, const ModelConfig& config) {
  ParamSet<float> out;
  for (const auto& [name, shape] : parameter_layout(config)) {
    const NamedTensor* t = ckpt.find(name);
    if (t == nullptr || t->data.size() != shape.first * shape.second) {
      throw std::invalid_argument("checkpoint: tensor '" + name + "' missing or misshapen");
    }
    Matrix<float> m(shape.first, shape.second);
    m.data = t->data;
    out.params.push_back({name, std::move(m), name.ends_with(".bias")});
  }
  return out;
}

template <typename T>
Matrix<T> forward(const ModelConfig& config, const ParamSet<T>& params, const Matrix<T>& features,
                  const Matrix<T>& spatial, ForwardCache<T>* cache) {
  const LayerIndex idx(config);
  const size_t n = features.rows;
  check_shape(features.cols == kInputFeatures, "forward", "features need 3 columns");
  check_shape(params.params.size() == 2 * (idx.n_features + idx.n_head) + (config.arch == Arch::kDgcnn ? 2 : 0),
              "forward", "parameter count does not match config");
  ForwardCache<T> local_cache;
  ForwardCache<T>& c = cache != nullptr ? *cache : local_cache;
  c = ForwardCache<T>{};
  c.input = features;

  Matrix<T> x = features;
  std::vector<Matrix<T>> outputs;
  if (config.arch == Arch::kDgcnn) {
    if (config.k >= n) throw std::invalid_argument("forward: k must be smaller than the point count");
    if (!config.dynamic_graph) {
      check_shape(spatial.rows == n && spatial.cols == 2, "forward", "spatial must be n x 2");
      c.graphs.push_back(knn_grid(std::span<const T>(spatial.data), n, config.k));
    }
    for (size_t l = 0; l < idx.n_features; ++l) {
      if (config.dynamic_graph) c.graphs.push_back(build_graph(x, config.k));
      const KnnGraph& g = c.graphs.back();
      nn::EdgeConvCache<T> ec;
      Matrix<T> h = nn::edgeconv_forward(x, g, weight(params, idx.feature(l)), bias(params, idx.feature(l)), &ec);
      c.feature_in.push_back(std::move(x));
      c.edge.push_back(std::move(ec));
      outputs.push_back(h);
      x = std::move(h);
    }
    c.local = concat_columns(outputs);
    c.fuse_pre = nn::linear_forward(c.local, weight(params, idx.fuse), bias(params, idx.fuse));
    c.pooled_from = nn::leaky_relu_forward(c.fuse_pre);
  } else {
    for (size_t l = 0; l < idx.n_features; ++l) {
      Matrix<T> pre = nn::linear_forward(x, weight(params, idx.feature(l)), bias(params, idx.feature(l)));
      Matrix<T> h = nn::leaky_relu_forward(pre);
      c.feature_in.push_back(std::move(x));
      c.feature_pre.push_back(std::move(pre));
      x = std::move(h);
    }
    c.local = x;
    c.pooled_from = std::move(x);
  }
  c.global = nn::global_maxpool_forward(c.pooled_from, &c.global_argmax);
  if (config.arch == Arch::kPointNet) c.pooled_from = Matrix<T>{};  // same as c.local

  Matrix<T> a;
  for (size_t h = 0; h < idx.n_head; ++h) {
    const Matrix<T>& w = weight(params, idx.head(h));
    auto b = bias(params, idx.head(h));
    Matrix<T> pre = h == 0 ? nn::broadcast_linear_forward(c.local, std::span<const T>(c.global), w, b)
                           : nn::linear_forward(a, w, b);
    if (h > 0) c.head_in.push_back(std::move(a));
    if (h + 1 == idx.n_head) {
      a = std::move(pre);
    } else {
      a = nn::leaky_relu_forward(pre);
      c.head_pre.push_back(std::move(pre));
    }
  }
  return a;
}

template <typename T>
void backward(const ModelConfig& config, const ParamSet<T>& params, const ForwardCache<T>& c,
              const Matrix<T>& dlogits, ParamSet<T>& grads) {
  const LayerIndex idx(config);
  const size_t n = c.input.rows;

  // Head, last layer first. head_in[h - 1] is the input of head layer h > 0.
  Matrix<T> d = dlogits;
  for (size_t h = idx.n_head; h-- > 1;) {
    Matrix<T> dx;
    nn::linear_backward(c.head_in[h - 1], weight(params, idx.head(h)), d, &dx, weight(grads, idx.head(h)),
                        bias(grads, idx.head(h)));
    d = nn::leaky_relu_backward(c.head_pre[h - 1], dx);
  }
  Matrix<T> dlocal;
  std::vector<T> dglobal;
  nn::broadcast_linear_backward(c.local, std::span<const T>(c.global), weight(params, idx.head(0)), d, &dlocal,
                                &dglobal, weight(grads, idx.head(0)), bias(grads, idx.head(0)));

  Matrix<T> dpooled = nn::global_maxpool_backward<T>(n, dglobal, c.global_argmax);

  if (config.arch == Arch::kPointNet) {
    add_into(dlocal, dpooled);
    Matrix<T> dh = std::move(dlocal);
    for (size_t l = idx.n_features; l-- > 0;) {
      Matrix<T> dpre = nn::leaky_relu_backward(c.feature_pre[l], dh);
      Matrix<T> dx;
      nn::linear_backward(c.feature_in[l], weight(params, idx.feature(l)), dpre, l > 0 ? &dx : nullptr,
                          weight(grads, idx.feature(l)), bias(grads, idx.feature(l)));
      dh = std::move(dx);
    }
    return;
  }

  Matrix<T> dfuse = nn::leaky_relu_backward(c.fuse_pre, dpooled);
  Matrix<T> dlocal_fuse;
  nn::linear_backward(c.local, weight(params, idx.fuse), dfuse, &dlocal_fuse, weight(grads, idx.fuse),
                      bias(grads, idx.fuse));
  add_into(dlocal, dlocal_fuse);

  std::vector<size_t> offsets;
  size_t off = 0;
  for (size_t w : config.feature_widths) {
    offsets.push_back(off);
    off += w;
  }
  Matrix<T> dh;
  for (size_t l = idx.n_features; l-- > 0;) {
    Matrix<T> piece = column_slice(dlocal, offsets[l], config.feature_widths[l]);
    if (l + 1 < idx.n_features) add_into(piece, dh);
    const KnnGraph& g = config.dynamic_graph ? c.graphs[l] : c.graphs.front();
    Matrix<T> dx;
    nn::edgeconv_backward(c.feature_in[l], g, weight(params, idx.feature(l)), c.edge[l], piece,
                          l > 0 ? &dx : nullptr, weight(grads, idx.feature(l)), bias(grads, idx.feature(l)));
    dh = std::move(dx);
  }
}

std::vector<uint8_t> argmax_labels(const Matrix<float>& logits) {
  std::vector<uint8_t> labels(logits.rows);
  for (size_t i = 0; i < logits.rows; ++i) {
    const float* z = logits.row(i);
    size_t best = 0;
    for (size_t j = 1; j < logits.cols; ++j) {
      if (z[j] > z[best]) best = j;
    }
    labels[i] = static_cast<uint8_t>(best);
  }
  return labels;
}

template <typename T>
AdamState make_adam_state(const ParamSet<T>& params, double lr) {
  AdamState s;
  s.lr = lr;
  for (const auto& p : params.params) {
    s.m.emplace_back(p.value.size(), 0.0);
    s.v.emplace_back(p.value.size(), 0.0);
  }
  return s;
}

template <typename T>
void adam_step(ParamSet<T>& params, const ParamSet<T>& grads, AdamState& state) {
  if (params.params.size() != grads.params.size() || state.m.size() != params.params.size()) {
    throw std::invalid_argument("adam_step: parameter/gradient/state count mismatch");
  }
  for (size_t p = 0; p < params.params.size(); ++p) {
    if (params.params[p].value.size() != grads.params[p].value.size() ||
        state.m[p].size() != params.params[p].value.size()) {
      throw std::invalid_argument("adam_step: shape mismatch for " + params.params[p].name);
    }
  }
  state.t += 1;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (size_t p = 0; p < params.params.size(); ++p) {
    auto& w = params.params[p].value.data;
    const auto& g = grads.params[p].value.data;
    auto& m = state.m[p];
    auto& v = state.v[p];
    for (size_t i = 0; i < w.size(); ++i) {
      double gi = g[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * gi;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * gi * gi;
      double step = state.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + state.eps);
      w[i] = static_cast<T>(w[i] - step);
    }
  }
}

template Matrix<float> forward(const ModelConfig&, const ParamSet<float>&, const Matrix<float>&,
                               const Matrix<float>&, ForwardCache<float>*);
template Matrix<double> forward(const ModelConfig&, const ParamSet<double>&, const Matrix<double>&,
                                const Matrix<double>&, ForwardCache<double>*);
template void backward(const ModelConfig&, const ParamSet<float>&, const ForwardCache<float>&,
                       const Matrix<float>&, ParamSet<float>&);
template void backward(const ModelConfig&, const ParamSet<double>&, const ForwardCache<double>&,
                       const Matrix<double>&, ParamSet<double>&);
template AdamState make_adam_state(const ParamSet<float>&, double);
template AdamState make_adam_state(const ParamSet<double>&, double);
template void adam_step(ParamSet<float>&, const ParamSet<float>&, AdamState&);
template void adam_step(ParamSet<double>&, const ParamSet<double>&, AdamState&);

}  // namespace vortexseg
