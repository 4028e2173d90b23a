/*
 * Copyright 2026 The mupax project contributors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <functional>

namespace mupax {

/// Calls fn(b) for every b in [0, blocks) using up to `workers` threads
/// (workers <= 1 runs inline). Blocks are claimed in ascending order. After a
/// failure no new blocks start; the exception of the lowest-numbered failed
/// block is rethrown once all threads have joined.
void parallel_blocks(std::size_t blocks, std::size_t workers, const std::function<void(std::size_t)>& fn);

/// Worker count after honoring a predictor's concurrency limit (0 = none).
std::size_t effective_workers(std::size_t requested, std::size_t limit);

}  // namespace mupax
