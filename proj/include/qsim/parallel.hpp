#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace qsim {

// Chunked parallel loop. Each worker owns a contiguous index range, so any
// per-index output is identical for every worker count; reductions must be
// combined in chunk order by the caller.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& body) {
    if (n == 0) return;
    threads = std::max(1, threads);
    std::size_t nthreads = std::min<std::size_t>(threads, n);
    if (nthreads <= 1) {
        body(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    std::size_t chunk = (n + nthreads - 1) / nthreads;
    for (std::size_t t = 0; t < nthreads; ++t) {
        std::size_t lo = t * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] { body(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

// Deterministic max-reduction: per-chunk maxima combined in chunk order.
template <typename Fn>
double parallel_max(std::size_t n, int threads, double init, Fn&& value_at) {
    threads = std::max(1, threads);
    std::size_t nthreads = std::min<std::size_t>(threads, std::max<std::size_t>(n, 1));
    std::vector<double> partial(nthreads, init);
    std::size_t chunk = n == 0 ? 1 : (n + nthreads - 1) / nthreads;
    parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
        std::size_t slot = lo / chunk;
        double best = init;
        for (std::size_t i = lo; i < hi; ++i) best = std::max(best, value_at(i));
        partial[slot] = best;
    });
    double best = init;
    for (double v : partial) best = std::max(best, v);
    return best;
}

}  // namespace qsim
