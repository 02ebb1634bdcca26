// Copyright 2026 The MEGCF Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef MEGCF_PARALLEL_H_
#define MEGCF_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace megcf {

// Worker count used by row-partitioned loops. Initialized from the
// MEGCF_THREADS environment variable (default 1).
int NumThreads();
void SetNumThreads(int threads);

// Calls fn(begin, end) over contiguous chunks of [0, n). Chunks are disjoint,
// so any loop whose iterations write only their own rows produces output that
// does not depend on the worker count. Runs inline when n < min_parallel.
void ParallelFor(std::size_t n,
                 const std::function<void(std::size_t, std::size_t)>& fn,
                 std::size_t min_parallel = 256);

}  // namespace megcf

#endif  // MEGCF_PARALLEL_H_
