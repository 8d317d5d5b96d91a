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
#include <optional>

namespace vortexseg {

// Bit-exact pseudo-random stream shared by every stochastic stage (scene
// drawing, noise, point sampling, weight init, shuffling). The u64 stream is
// splitmix64; uniforms take the top 53 bits; normals use Box-Muller on two
// consecutive uniforms and hand out the cosine branch first, then the sine
// branch on the next call.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next();

  // Uniform double in [0, 1): (x >> 11) * 2^-53.
  double uniform();

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be positive.
  uint64_t below(uint64_t n);

  // Standard normal via Box-Muller.
  double normal();

 private:
  uint64_t state_;
  std::optional<double> spare_normal_;
};

// Value i (zero-based) of the splitmix64 stream seeded with `seed`. Used to
// derive per-scan seeds from a dataset seed and per-purpose sub-streams from
// a scan seed.
uint64_t derive_seed(uint64_t seed, uint64_t index);

// Independent sub-streams of one seed. The numeric values are part of the
// reproducibility contract and must not be renumbered.
enum class Stream : uint64_t {
  kScene = 0,
  kNoise = 1,
  kSampling = 2,
  kInit = 3,
  kShuffle = 4,
};

inline SplitMix64 stream_rng(uint64_t seed, Stream stream) {
  return SplitMix64(derive_seed(seed, static_cast<uint64_t>(stream)));
}

}  // namespace vortexseg
