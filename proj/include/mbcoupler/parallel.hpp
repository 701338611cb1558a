// Copyright 2026 The mbcoupler Authors
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

#pragma once

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace mbc {

// Thread count resolution: explicit request, then MBCOUPLER_THREADS, then
// hardware concurrency.
inline int resolve_thread_count(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MBCOUPLER_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// Runs f(i) for i in [0, count) on a static partition. Work items must be
// independent; callers own any result slots, so output never depends on the
// schedule.
template <typename F>
void parallel_for(std::uint64_t count, int threads, F&& f) {
  threads = resolve_thread_count(threads);
  if (threads <= 1 || count <= 1) {
    for (std::uint64_t i = 0; i < count; ++i) f(i);
    return;
  }
  const std::uint64_t workers =
      std::min<std::uint64_t>(static_cast<std::uint64_t>(threads), count);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::uint64_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::uint64_t i = w; i < count; i += workers) f(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace mbc
