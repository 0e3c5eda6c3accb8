// Copyright 2026 The tpf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace tpf {

/// Worker count taken from the TPF_THREADS environment variable (default 1).
inline int thread_count() {
  const char* env = std::getenv("TPF_THREADS");
  if (env == nullptr) return 1;
  try {
    const int n = std::stoi(env);
    if (n <= 0) return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return n;
  } catch (...) {
    return 1;
  }
}

/// Runs body(i) for i in [begin, end) over contiguous chunks.
///
/// Callers only write to per-index outputs, so the result does not depend on
/// the number of workers.
template <typename Body>
void parallel_for(std::size_t begin, std::size_t end, Body&& body) {
  if (end <= begin) return;
  const std::size_t count = end - begin;
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), count);
  if (workers <= 1) {
    for (std::size_t i = begin; i < end; ++i) body(i);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = begin + count * w / workers;
    const std::size_t hi = begin + count * (w + 1) / workers;
    threads.emplace_back([&, lo, hi, w] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace tpf
