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

#include <cstddef>
#include <functional>

namespace vortexseg {

// Worker cap from VORTEXSEG_THREADS; unset or 0 means hardware concurrency.
size_t worker_count();

// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = worker_count()).
// Callers own result ordering: fn must only write to slot i.
void parallel_for(size_t n, const std::function<void(size_t)>& fn, size_t threads = 0);

}  // namespace vortexseg
