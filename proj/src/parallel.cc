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


#include "megcf/parallel.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace megcf {
namespace {

int ThreadsFromEnvironment() {
  const char* value = std::getenv("MEGCF_THREADS");
  if (value == nullptr) return 1;
  try {
    return std::max(1, std::stoi(value));
  } catch (...) {
    return 1;
  }
}

std::atomic<int>& ThreadSetting() {
  static std::atomic<int> threads{ThreadsFromEnvironment()};
  return threads;
}

}  // namespace

int NumThreads() { return ThreadSetting().load(); }

void SetNumThreads(int threads) { ThreadSetting().store(std::max(1, threads)); }

void ParallelFor(std::size_t n,
                 const std::function<void(std::size_t, std::size_t)>& fn,
                 std::size_t min_parallel) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(NumThreads()), n);
  if (workers <= 1 || n < min_parallel) {
    if (n > 0) fn(0, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::exception_ptr> errors(workers);
  auto run = [&fn, &errors](std::size_t w, std::size_t begin, std::size_t end) {
    try {
      fn(begin, end);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(run, w, begin, end);
  }
  run(0, 0, std::min(n, chunk));
  for (auto& t : pool) t.join();
  // First failing chunk wins so the reported error is deterministic.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace megcf
