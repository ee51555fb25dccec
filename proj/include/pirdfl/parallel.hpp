#pragma once
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pirdfl {

/// Worker count: hardware threads capped by the PIRDFL_THREADS environment
/// variable. 1 disables OpenMP dispatch entirely.
inline int max_threads() {
  static int cached = [] {
#ifdef _OPENMP
    int n = omp_get_max_threads();
#else
    int n = 1;
#endif
    if (const char* env = std::getenv("PIRDFL_THREADS")) {
      const int cap = std::atoi(env);
      if (cap >= 1 && cap < n) n = cap;
    }
    return n;
  }();
  return cached;
}

/// Parallel loop over [0, n). Each index must write only to its own output
/// slot; all cross-index reductions happen after the loop in index order, so
/// results are bit-identical to serial execution for any thread count.
template <typename Fn>
void parallel_for(long n, Fn&& fn) {
#ifdef _OPENMP
  const int nt = max_threads();
  if (nt > 1 && n > 1) {
#pragma omp parallel for num_threads(nt) schedule(static)
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
#endif
  for (long i = 0; i < n; ++i) fn(i);
}

}  // namespace pirdfl
