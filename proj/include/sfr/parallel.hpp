#pragma once

#include <cstddef>

#include <functional>

namespace sfr::parallel {

// Caps the worker count for parallel_for. 0 restores the default
// (SFR_THREADS environment variable, else hardware concurrency).
void set_max_threads(unsigned n);
unsigned max_threads();

namespace detail {
void run(std::size_t count, const std::function<void(std::size_t)>& fn);
}

// Runs fn(i) for i in [0, count). Callers must make the result independent of
// execution order: disjoint output slots and pre-assigned seed streams.
// Nested regions run serially to avoid oversubscription.
template <class F>
void parallel_for(std::size_t count, F&& fn) {
  detail::run(count, std::function<void(std::size_t)>(std::forward<F>(fn)));
}

}  // namespace sfr::parallel
