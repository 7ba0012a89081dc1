#pragma once

#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace slim {

// Worker count: SLIM_WORKERS env var wins over the requested value; 0 means
// "use hardware concurrency".
inline int resolve_workers(int requested) {
  if (const char* env = std::getenv("SLIM_WORKERS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 0) requested = static_cast<int>(v);
  }
  if (requested <= 0) {
    unsigned hc = std::thread::hardware_concurrency();
    requested = hc == 0 ? 1 : static_cast<int>(hc);
  }
  return requested;
}

// Static block partition of [0, count). Results must be written to disjoint
// locations by the body; the split is deterministic but the interleaving is
// not, so the body must not accumulate shared state.
template <typename Body>
void parallel_for(std::size_t count, int workers, Body&& body) {
  workers = resolve_workers(workers);
  if (count == 0) return;
  if (workers <= 1 || count == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::size_t nthreads = std::min<std::size_t>(workers, count);
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  std::vector<std::exception_ptr> errors(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t] {
      std::size_t lo = count * t / nthreads;
      std::size_t hi = count * (t + 1) / nthreads;
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

} // namespace slim
