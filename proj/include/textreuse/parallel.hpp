#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace textreuse {

inline std::size_t resolve_workers(std::size_t requested) noexcept {
    if (requested > 0) return requested;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

// Runs fn(worker, i) for every i in [0, count) across `workers` threads.
// The first exception thrown by any task is rethrown after all threads join.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
    workers = std::min(resolve_workers(workers), std::max<std::size_t>(count, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(std::size_t{0}, i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) break;
                try {
                    fn(w, i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next.store(count);
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

class BatchFailure : public std::runtime_error {
public:
    BatchFailure(std::size_t begin, std::size_t end, const std::string& what)
        : std::runtime_error("work units [" + std::to_string(begin) + ", " + std::to_string(end) +
                             ") failed: " + what),
          begin_(begin), end_(end) {}

    std::size_t begin() const noexcept { return begin_; }
    std::size_t end() const noexcept { return end_; }

private:
    std::size_t begin_;
    std::size_t end_;
};

/// Splits [0, count) into batches and runs fn(begin, end) on each. A batch
/// that throws is retried up to `retries` times; after that a BatchFailure
/// naming the unit range is thrown.
template <typename Fn>
void run_batches(std::size_t count, std::size_t batch_size, std::size_t workers, std::size_t retries,
                 Fn&& fn) {
    batch_size = std::max<std::size_t>(batch_size, 1);
    const std::size_t batches = (count + batch_size - 1) / batch_size;
    parallel_for(batches, workers, [&](std::size_t, std::size_t b) {
        const std::size_t begin = b * batch_size;
        const std::size_t end = std::min(count, begin + batch_size);
        for (std::size_t attempt = 0;; ++attempt) {
            try {
                fn(begin, end);
                return;
            } catch (const std::exception& e) {
                if (attempt >= retries) throw BatchFailure(begin, end, e.what());
            }
        }
    });
}

} // namespace textreuse
