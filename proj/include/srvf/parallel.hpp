#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace srvf {

// Execution policy for the data-parallel kernels. Every parallel loop writes
// results into preassigned slots, so Serial and Parallel produce bitwise
// identical output; tests rely on that.
enum class Exec { Serial, Parallel };

namespace par {

void set_threads(int n);  // 0 restores the hardware default
int max_threads();

template <typename F>
void for_index(std::int64_t n, Exec exec, F&& body) {
#ifdef _OPENMP
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
#endif
  for (std::int64_t i = 0; i < n; ++i) body(i);
}

}  // namespace par
}  // namespace srvf
