#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace diffrec {

inline int resolve_workers(int requested) {
#ifdef _OPENMP
    return requested > 0 ? requested : omp_get_max_threads();
#else
    (void)requested;
    return 1;
#endif
}

// Runs fn(index, thread_id) for every index in [0, count). Results must go
// into per-index or per-thread slots; merge order is the caller's job, which
// keeps outputs identical for any worker count.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
    const int nt = resolve_workers(workers);
#ifdef _OPENMP
    if (nt > 1) {
#pragma omp parallel num_threads(nt)
        {
            const int tid = omp_get_thread_num();
#pragma omp for schedule(dynamic, 16)
            for (long long i = 0; i < static_cast<long long>(count); ++i)
                fn(static_cast<std::size_t>(i), tid);
        }
        return;
    }
#endif
    for (std::size_t i = 0; i < count; ++i) fn(i, 0);
}

}  // namespace diffrec
