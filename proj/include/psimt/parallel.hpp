#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace psimt {

// Thread cap: PSIMT_THREADS env var, else hardware concurrency.
inline int max_threads() {
  if (const char* env = std::getenv("PSIMT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// Data-parallel index loop; fn(i) must write only to slot i of shared
// outputs, so results are deterministic regardless of thread count.
template <class F>
void parallel_for(int n, F&& fn) {
  const int nthreads = std::min(max_threads(), n);
  if (nthreads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace psimt
