#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ps2r {

// Worker count: hardware concurrency, capped by the PS2R_THREADS env var
// when set (values < 1 mean 1).
inline unsigned worker_count() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("PS2R_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap < 1)
            n = 1;
        else if (static_cast<unsigned long>(cap) < n)
            n = static_cast<unsigned>(cap);
    }
    return n;
}

// Runs fn(i) for i in [0, n) across worker threads in contiguous chunks.
// Each index must write only its own output slots, so the result is
// bit-identical to a sequential loop. The first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned workers = worker_count();
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const unsigned used = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    std::vector<std::thread> pool;
    pool.reserve(used);
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    std::mutex err_mutex;
    const std::size_t chunk = (n + used - 1) / used;
    for (unsigned w = 0; w < used; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi && !failed.load(std::memory_order_relaxed); ++i)
                    fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!err) err = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

} // namespace ps2r
