#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

#include "glcp/types.hpp"

namespace glcp {

/// Runs fn(i) for i in [0, count) across num_threads workers.
///
/// Indices are partitioned into contiguous blocks, so per-index output slots
/// make the result independent of the thread count. The body must not touch
/// shared mutable state keyed by anything other than i.
template <typename Fn>
void parallel_for(std::size_t count, int num_threads, Fn&& fn) {
  if (num_threads < 1) throw param_error("parallel_for: thread count must be positive");
  if (count == 0) return;
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(num_threads), count);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::vector<std::exception_ptr> errors(workers);
  std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t begin = w * chunk;
    std::size_t end = std::min(count, begin + chunk);
    pool.emplace_back([&, w, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace glcp
