// Copyright 2026 The flexauction Authors
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

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace flexauction {

// Runs fn(chunk, begin, end) for every fixed-size chunk of [0, count) on up
// to `workers` threads. Chunk boundaries do not depend on the worker count, so
// callers that merge per-chunk results in chunk order get identical output
// for any number of workers.
template <class Fn>
void for_each_chunk(std::size_t count, std::size_t chunk_size, int workers, Fn&& fn) {
  if (count == 0) return;
  chunk_size = std::max<std::size_t>(chunk_size, 1);
  const std::size_t chunks = (count + chunk_size - 1) / chunk_size;
  auto run = [&](std::size_t c) { fn(c, c * chunk_size, std::min(count, (c + 1) * chunk_size)); };
  const auto threads = static_cast<std::size_t>(std::clamp<int>(workers, 1, 64));
  if (threads == 1 || chunks == 1) {
    for (std::size_t c = 0; c < chunks; ++c) run(c);
    return;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr error;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(threads, chunks); ++t) {
    pool.emplace_back([&] {
      while (true) {
        std::size_t c = 0;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= chunks || error) return;
          c = next++;
        }
        try {
          run(c);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace flexauction
