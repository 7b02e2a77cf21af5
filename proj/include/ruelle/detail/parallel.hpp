#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ruelle::detail {

// Worker count: RUELLE_THREADS caps it, hardware concurrency is the default.
inline int worker_count(int requested = 0) {
    int n = requested > 0 ? requested
                          : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("RUELLE_THREADS")) {
        char* end = nullptr;
        long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1 && cap < n) n = static_cast<int>(cap);
    }
    return n;
}

// Runs fn(task, worker) for task in [0, n_tasks). Tasks are handed out through
// an atomic counter; each task writes only its own slot of the output, so the
// result is independent of scheduling. The first exception is rethrown.
inline void parallel_for(long n_tasks,
                         const std::function<void(long, int)>& fn,
                         int requested_threads = 0) {
    const int workers = worker_count(requested_threads);
    if (workers == 1 || n_tasks <= 1) {
        for (long t = 0; t < n_tasks; ++t) fn(t, 0);
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&](int worker) {
        for (;;) {
            long t = next.fetch_add(1);
            if (t >= n_tasks) return;
            try {
                fn(t, worker);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(n_tasks);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(body, w);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace ruelle::detail
