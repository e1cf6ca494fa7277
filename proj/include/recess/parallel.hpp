#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace recess {

/// Worker count for `requested` (0 means one per hardware thread).
[[nodiscard]] inline unsigned resolve_threads(unsigned requested) noexcept {
    if (requested > 0) {
        return requested;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/**
 * @brief Runs compute(i) for i in [0, n) on a worker pool and hands each result
 * to consume(i, result) on the calling thread in strictly increasing i.
 *
 * At most `window` results are buffered ahead of the consumer. Output is
 * therefore identical for any thread count. The first exception thrown by
 * either callback stops the pool and is rethrown.
 */
template <class Result, class Compute, class Consume>
void ordered_parallel_for(std::size_t n, unsigned threads, Compute&& compute, Consume&& consume,
                          std::size_t window = 64) {
    threads = resolve_threads(threads);
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            consume(i, compute(i));
        }
        return;
    }
    window = std::max<std::size_t>(window, threads);

    std::mutex mu;
    std::condition_variable cv;
    std::vector<std::optional<Result>> slots(n);
    std::size_t next = 0;
    std::size_t consumed = 0;
    bool stop = false;
    std::exception_ptr failure;

    auto worker = [&] {
        while (true) {
            std::size_t i = 0;
            {
                std::unique_lock lock(mu);
                cv.wait(lock, [&] { return stop || next >= n || next < consumed + window; });
                if (stop || next >= n) {
                    return;
                }
                i = next++;
            }
            try {
                Result r = compute(i);
                std::lock_guard lock(mu);
                slots[i].emplace(std::move(r));
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) {
                    failure = std::current_exception();
                }
                stop = true;
            }
            cv.notify_all();
        }
    };

    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back(worker);
    }

    for (std::size_t i = 0; i < n; ++i) {
        std::optional<Result> r;
        {
            std::unique_lock lock(mu);
            cv.wait(lock, [&] { return stop || slots[i].has_value(); });
            if (!slots[i].has_value()) {
                break;
            }
            r = std::move(slots[i]);
            slots[i].reset();
        }
        try {
            consume(i, std::move(*r));
        } catch (...) {
            std::lock_guard lock(mu);
            if (!failure) {
                failure = std::current_exception();
            }
            stop = true;
        }
        {
            std::lock_guard lock(mu);
            ++consumed;
            if (stop) {
                break;
            }
        }
        cv.notify_all();
    }
    {
        std::lock_guard lock(mu);
        stop = true;
    }
    cv.notify_all();
    pool.clear();
    if (failure) {
        std::rethrow_exception(failure);
    }
}

}  // namespace recess
