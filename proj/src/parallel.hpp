#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace gp3 {

// Worker count resolution: <= 0 means hardware concurrency.
inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Chunked parallel loop over [0, n). fn(begin, end, worker) must be pure with
// respect to shared state and write results only by index, so the outcome is
// identical for any worker count. The first exception thrown by any worker is
// rethrown on the calling thread.
inline void parallel_chunks(std::size_t n, int workers,
                            const std::function<void(std::size_t, std::size_t, int)>& fn) {
    workers = resolve_workers(workers);
    if (n == 0) return;
    const std::size_t chunk =
        std::max<std::size_t>(64, n / (16 * static_cast<std::size_t>(workers)) + 1);
    if (workers == 1 || n <= chunk) {
        fn(0, n, 0);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto body = [&](int worker) {
        for (;;) {
            if (failed.load(std::memory_order_relaxed)) return;
            const std::size_t begin = next.fetch_add(chunk);
            if (begin >= n) return;
            const std::size_t end = std::min(begin + chunk, n);
            try {
                fn(begin, end, worker);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int w = 1; w < workers; ++w) pool.emplace_back(body, w);
    body(0);
    for (auto& t : pool) t.join();
    if (failed.load()) std::rethrow_exception(error);
}

}  // namespace gp3
