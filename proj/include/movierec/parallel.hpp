#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

namespace movierec {

inline unsigned worker_count() {
    if (const char* env = std::getenv("MOVIEREC_THREADS")) {
        long n = std::atol(env);
        if (n >= 1) return static_cast<unsigned>(n);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

/// Runs fn(i) for i in [begin, end) on contiguous index chunks across
/// worker threads. Each index is processed exactly once and every fn(i)
/// must write only state owned by index i, so results do not depend on
/// the thread count or schedule.
template <typename Fn>
void parallel_for(std::size_t begin, std::size_t end, Fn&& fn) {
    const std::size_t n = end > begin ? end - begin : 0;
    if (n == 0) return;
    const unsigned workers = worker_count();
    if (workers == 1 || n < 2) {
        for (std::size_t i = begin; i < end; ++i) fn(i);
        return;
    }
    const std::size_t chunks = std::min<std::size_t>(workers, n);
    const std::size_t step = (n + chunks - 1) / chunks;
    std::vector<std::thread> pool;
    pool.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t lo = begin + c * step;
        const std::size_t hi = std::min(end, lo + step);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace movierec
