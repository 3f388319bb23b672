#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rwdre {

// Worker count from RWDRE_THREADS, defaulting to available parallelism.
int worker_count();

enum class Execution { Serial, Parallel };

// Runs fn(i) for i in [0, n) and returns the results in index order.
//
// Serial is the reference implementation; Parallel distributes replicas over
// OpenMP threads. Results are identical for both because every replica derives
// its randomness from its index alone and aggregation happens afterwards in
// index order. The first exception by index is rethrown.
template <class R, class F>
std::vector<R> map_replicas(std::int64_t n, F&& fn,
                            Execution exec = Execution::Parallel) {
  std::vector<std::optional<R>> slots(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  auto run_one = [&](std::int64_t i) {
    try {
      slots[static_cast<std::size_t>(i)].emplace(fn(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  };
  if (exec == Execution::Serial) {
    for (std::int64_t i = 0; i < n; ++i) run_one(i);
  } else {
#ifdef _OPENMP
    const int threads = worker_count();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::int64_t i = 0; i < n; ++i) run_one(i);
#else
    for (std::int64_t i = 0; i < n; ++i) run_one(i);
#endif
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace rwdre
