#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kglab {

enum class Exec { serial, parallel };

// Apply f(i) for i in [0, n).  The parallel path writes only to
// per-index slots inside f, so results are bitwise identical to the
// serial path regardless of thread count.
template <class F>
void for_each_index(std::size_t n, Exec exec, F&& f) {
    if (exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            f(static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < n; ++i) f(i);
    }
}

// Fill slots in parallel (or not), then reduce them in a fixed serial
// order so floating-point sums are reproducible bit-for-bit.
template <class F>
double indexed_sum(std::size_t n, Exec exec, F&& term) {
    std::vector<double> slot(n);
    for_each_index(n, exec, [&](std::size_t i) { slot[i] = term(i); });
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += slot[i];
    return s;
}

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace kglab
