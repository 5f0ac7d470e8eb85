#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace netfx {

/// Worker count: NETFX_WORKERS if set and positive, else hardware concurrency.
[[nodiscard]] inline unsigned worker_count() {
    if (const char* env = std::getenv("NETFX_WORKERS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {
inline thread_local bool inside_parallel_region = false;
}

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Work is pulled
/// dynamically; callers write results by index so output order never depends
/// on scheduling. The first exception thrown is rethrown after all workers join.
/// Nested calls from inside a worker run serially.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn, unsigned workers = worker_count()) {
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    if (workers <= 1 || detail::inside_parallel_region) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            detail::inside_parallel_region = true;
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next.store(count);
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace netfx
