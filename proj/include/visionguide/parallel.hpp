#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace visionguide {

/// Runs fn(i) for every i in [0, count) on up to `workers` threads.
///
/// Items are claimed dynamically, so callers must write results by index and
/// never depend on completion order. If any invocation throws, remaining items
/// are abandoned and the exception from the lowest failing index is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
    if (count == 0) return;
    const std::size_t threads =
        std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, workers)));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::exception_ptr error;
    std::size_t error_index = count;

    auto body = [&] {
        for (;;) {
            if (failed.load(std::memory_order_relaxed)) return;
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
                failed.store(true, std::memory_order_relaxed);
            }
        }
    };

    std::vector<std::jthread> pool;
    pool.reserve(threads - 1);
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(body);
    body();
    pool.clear();  // joins

    if (error) std::rethrow_exception(error);
}

/// Splits [0, count) into at most `workers` contiguous chunks and runs
/// fn(begin, end) for each one.
template <typename Fn>
void parallel_chunks(std::size_t count, int workers, Fn&& fn) {
    if (count == 0) return;
    const std::size_t chunks =
        std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, workers)) * 4);
    const std::size_t per = (count + chunks - 1) / chunks;
    parallel_for(chunks, workers, [&](std::size_t c) {
        const std::size_t begin = c * per;
        const std::size_t end = std::min(count, begin + per);
        if (begin < end) fn(begin, end);
    });
}

}  // namespace visionguide
