#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qexp {

/// Process-wide interrupt flag. Long-running loops stop scheduling new work
/// once it is set; work already started runs to completion.
inline std::atomic<bool>& interrupt_flag() noexcept
{
    static std::atomic<bool> flag{false};
    return flag;
}

inline bool interrupted() noexcept { return interrupt_flag().load(std::memory_order_relaxed); }

/// Runs fn(i) for i in [0, n) on at most `workers` threads. The first
/// exception thrown by any task is rethrown after all threads join; tasks not
/// yet started when a failure occurs are skipped.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn)
{
    if (n == 0) {
        return;
    }
    workers = std::clamp<std::size_t>(workers, 1, n);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto body = [&] {
        while (!failed.load() && !interrupted()) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) {
                return;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
                failed.store(true);
            }
        }
    };

    if (workers == 1) {
        body();
    } else {
        std::vector<std::jthread> threads;
        threads.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            threads.emplace_back(body);
        }
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

}  // namespace qexp
