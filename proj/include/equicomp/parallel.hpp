#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

namespace equicomp {

// Parallelism cap: EQUICOMP_THREADS if set (minimum 1), else the hardware
// concurrency. Read on every call so tests can vary it.
inline unsigned max_threads() {
    if (const char* env = std::getenv("EQUICOMP_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
        return 1;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

// Runs worker(chunk_index, begin, end) over [0, total) split into contiguous
// chunks, one per thread. Chunk boundaries depend only on `total` and the
// thread cap, and callers merge per-chunk results in chunk order, so results
// are deterministic for any thread count as long as the merge is exact.
template <class Worker>
void for_each_chunk(long long total, Worker&& worker) {
    if (total <= 0) return;
    const long long nthreads = static_cast<long long>(max_threads());
    const long long chunks = total < nthreads ? total : nthreads;
    if (chunks <= 1) {
        worker(0, 0, total);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(chunks));
    const long long step = (total + chunks - 1) / chunks;
    for (long long c = 0; c < chunks; ++c) {
        const long long begin = c * step;
        const long long end = begin + step < total ? begin + step : total;
        if (begin >= end) break;
        pool.emplace_back([&worker, c, begin, end] { worker(c, begin, end); });
    }
    for (auto& t : pool) t.join();
}

} // namespace equicomp
