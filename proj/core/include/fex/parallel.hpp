#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace fex {

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Work is handed out
/// in fixed-size chunks so the set of chunk boundaries does not depend on the
/// thread count; callers that reduce per-chunk results in chunk order get
/// bit-identical sums for any thread count.
inline void parallel_for(std::uint64_t n, unsigned threads,
                         const std::function<void(std::uint64_t)>& fn,
                         std::uint64_t chunk = 1024) {
    if (n == 0) return;
    if (threads <= 1 || n <= chunk) {
        for (std::uint64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::uint64_t begin = next.fetch_add(chunk);
            if (begin >= n) break;
            const std::uint64_t end = begin + chunk < n ? begin + chunk : n;
            for (std::uint64_t i = begin; i < end; ++i) fn(i);
        }
    };
    std::vector<std::thread> pool;
    const unsigned nw = threads < 64 ? threads : 64;
    pool.reserve(nw);
    for (unsigned t = 0; t < nw; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

/// Default worker count: FEX_THREADS env var, else hardware concurrency.
inline unsigned default_thread_count() {
    if (const char* env = std::getenv("FEX_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

} // namespace fex
