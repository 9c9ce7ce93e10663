//
// Copyright 2026 The privsel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef PRIVSEL_PARALLEL_H_
#define PRIVSEL_PARALLEL_H_

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace privsel {

inline int ResolveThreadCount(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Calls body(t) for every t in [0, count) on up to `threads` workers. Work is
// handed out one index at a time; body must only write state owned by t.
template <typename Body>
void ParallelFor(int64_t count, int threads, Body&& body) {
  const int workers = static_cast<int>(
      std::min<int64_t>(ResolveThreadCount(threads), std::max<int64_t>(count, 1)));
  if (workers <= 1) {
    for (int64_t t = 0; t < count; ++t) body(t);
    return;
  }
  std::atomic<int64_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int64_t t = next.fetch_add(1); t < count; t = next.fetch_add(1)) {
        body(t);
      }
    });
  }
}

}  // namespace privsel

#endif  // PRIVSEL_PARALLEL_H_
