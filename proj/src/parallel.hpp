#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace cohort_audit::detail {

// Worker cap: COHORT_AUDIT_THREADS when set, else hardware concurrency.
// Results never depend on this value; it only bounds parallelism.
inline unsigned worker_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("COHORT_AUDIT_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1 && v <= 256) hw = std::min<unsigned>(hw, static_cast<unsigned>(v));
  }
  return hw;
}

// Runs fn(begin, end) over disjoint chunks of [0, n). Callers must write only
// to per-index slots so the chunking cannot affect results.
inline void parallel_chunks(std::size_t n,
                            const std::function<void(std::size_t, std::size_t)>& fn) {
  unsigned workers = worker_count();
  if (workers <= 1 || n < 4096) {
    fn(0, n);
    return;
  }
  std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> threads;
  for (unsigned w = 0; w < workers; ++w) {
    std::size_t b = static_cast<std::size_t>(w) * chunk;
    std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    threads.emplace_back(fn, b, e);
  }
  for (auto& t : threads) t.join();
}

}  // namespace cohort_audit::detail
