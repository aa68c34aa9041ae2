#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace diffphy {

/// Number of work partitions used by the parallel helpers. Fixed (not tied
/// to the machine's core count) so that per-partition RNG streams, and with
/// them every result, are reproducible across machines and thread counts.
inline constexpr std::size_t kPartitions = 16;

/// Splits [0, n) into kPartitions contiguous ranges; returns the p-th.
inline std::pair<std::size_t, std::size_t> partition_range(std::size_t n, std::size_t p) {
    const std::size_t lo = n * p / kPartitions;
    const std::size_t hi = n * (p + 1) / kPartitions;
    return {lo, hi};
}

/// Runs fn(p) for every partition index p on a small thread pool. Each
/// partition must be independent; exceptions are rethrown on the caller.
inline void parallel_partitions(const std::function<void(std::size_t)>& fn) {
    const unsigned hw = std::thread::hardware_concurrency();
    const std::size_t n_threads = std::min<std::size_t>(kPartitions, hw == 0 ? 1 : hw);
    if (n_threads <= 1) {
        for (std::size_t p = 0; p < kPartitions; ++p) fn(p);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t p = next.fetch_add(1);
                if (p >= kPartitions) return;
                try {
                    fn(p);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace diffphy
