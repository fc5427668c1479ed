#pragma once

#include <cstddef>

namespace ieqa {

// Every data-parallel kernel in the library exists in two flavors: a plain
// serial loop (the reference) and an OpenMP version. Both write per-element
// results into preallocated slots and reduce in fixed element order, so their
// outputs are bit-identical for any thread count.
enum class Exec { serial, parallel };

// n == 0 leaves the OpenMP runtime default untouched.
void set_thread_count(int n);
int max_threads();

template <class Fn>
void for_each_index(std::size_t n, Exec exec, Fn&& fn) {
#ifdef _OPENMP
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      fn(static_cast<std::size_t>(i));
    }
    return;
  }
#endif
  (void)exec;
  for (std::size_t i = 0; i < n; ++i) {
    fn(i);
  }
}

}  // namespace ieqa
