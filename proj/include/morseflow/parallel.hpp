#pragma once

#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace morseflow {

// Runs fn(chunk, lo, hi) over a contiguous partition of [0, n) into
// `chunks` ranges, one worker thread per chunk. The first exception wins
// and is rethrown after all workers join.
inline void parallel_chunks(long n, int chunks,
                            const std::function<void(int, long, long)>& fn) {
  if (chunks < 1) chunks = 1;
  if (chunks == 1 || n < 2) {
    fn(0, 0, n);
    return;
  }
  std::vector<std::thread> workers;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int c = 0; c < chunks; ++c) {
    long lo = n * c / chunks;
    long hi = n * (c + 1) / chunks;
    workers.emplace_back([&, c, lo, hi] {
      try {
        fn(c, lo, hi);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (std::thread& w : workers) w.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace morseflow
