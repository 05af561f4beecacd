#pragma once

#include <cstddef>
#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bendkit {

// Execution policy for node-wise kernels. Every kernel in the library is
// written once and dispatched through these helpers; Exec::Serial is the
// reference path used by the consistency tests and the benchmark.
enum class Exec { Serial, Parallel };

Exec default_exec() noexcept;
void set_default_exec(Exec mode) noexcept;

// Per-index work with no shared mutable state. Results are identical under
// both policies because each index writes only its own slot.
template <class F>
inline void for_each_index(std::size_t n, F&& f, Exec mode) {
  if (mode == Exec::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
      f(static_cast<std::size_t>(i));
    return;
#endif
  }
  for (std::size_t i = 0; i < n; ++i) f(i);
}

template <class F>
inline void for_each_index(std::size_t n, F&& f) {
  for_each_index(n, static_cast<F&&>(f), default_exec());
}

// Max-reduction over indices. max is order-independent, so the parallel
// result is bit-identical to the serial one.
template <class F>
inline double max_over(std::size_t n, F&& f, Exec mode) {
  double best = 0.0;
  if (mode == Exec::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(max : best)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
      best = std::max(best, f(static_cast<std::size_t>(i)));
    return best;
#endif
  }
  for (std::size_t i = 0; i < n; ++i) best = std::max(best, f(i));
  return best;
}

template <class F>
inline double max_over(std::size_t n, F&& f) {
  return max_over(n, static_cast<F&&>(f), default_exec());
}

}  // namespace bendkit
