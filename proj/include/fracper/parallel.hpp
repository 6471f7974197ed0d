#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace fracper {

namespace detail {
inline std::atomic<int>& thread_count_slot() {
    static std::atomic<int> n{0};
    return n;
}
} // namespace detail

/// Number of worker threads used by parallel loops. Defaults to the value of
/// the FRACPER_THREADS environment variable, or all hardware threads.
inline int thread_count() {
    int n = detail::thread_count_slot().load(std::memory_order_relaxed);
    if (n > 0) return n;
    if (const char* env = std::getenv("FRACPER_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

inline void set_thread_count(int n) {
    detail::thread_count_slot().store(n > 0 ? n : 0, std::memory_order_relaxed);
}

/// Runs f(i) for i in [0, n). Work is split into static contiguous chunks,
/// so each index is processed by exactly one thread, in a fixed per-chunk
/// order. Results written per-index are identical for any thread count.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    const int nt = thread_count();
    if (nt <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(nt), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &f] {
            for (std::size_t i = lo; i < hi; ++i) f(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace fracper
