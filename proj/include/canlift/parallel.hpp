#pragma once

#include <cstddef>
#include <exception>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace canlift {

// Worker-pool size shared by all parallel kernels. 0 = machine parallelism.
void set_threads(int n);
int effective_threads();
int hardware_threads();

// Parallel loop over [0, n). fn(i) must write only to its own output slot;
// every kernel built on this has a serial twin used as the test reference.
template <class F>
void parallel_for(std::size_t n, F&& fn) {
#ifdef _OPENMP
    std::exception_ptr eptr = nullptr;
    int threads = effective_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical
            if (!eptr) eptr = std::current_exception();
        }
    }
    if (eptr) std::rethrow_exception(eptr);
#else
    for (std::size_t i = 0; i < n; ++i) fn(i);
#endif
}

template <class F>
void serial_for(std::size_t n, F&& fn) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

} // namespace canlift
