#pragma once

// Deterministic trial-parallel map over fixed-size chunks.
//
// Chunk boundaries depend only on the trial count, never on the number of
// workers, and each chunk's result lands in its own slot. Reducing the slots in
// index order therefore gives bit-identical totals at any parallelism.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fadefuse::parallel {

inline constexpr std::uint64_t kChunkTrials = 4096;

/// 0 selects the hardware concurrency.
inline std::size_t resolve_workers(std::size_t requested) {
    if (requested > 0) return requested;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs fn(first_trial, last_trial) -> Partial for each chunk of [0, trials)
/// and returns the partials in chunk order.
template <typename Partial, typename Fn>
std::vector<Partial> map_chunks(std::uint64_t trials, std::size_t workers, Fn&& fn) {
    const std::uint64_t chunks = (trials + kChunkTrials - 1) / kChunkTrials;
    std::vector<Partial> results(chunks);
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto drain = [&] {
        for (;;) {
            const std::uint64_t c = next.fetch_add(1);
            if (c >= chunks) return;
            try {
                const std::uint64_t first = c * kChunkTrials;
                results[c] = fn(first, std::min(trials, first + kChunkTrials));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(chunks);
            }
        }
    };

    const std::size_t pool = std::min<std::uint64_t>(resolve_workers(workers), std::max<std::uint64_t>(chunks, 1));
    if (pool <= 1) {
        drain();
    } else {
        std::vector<std::jthread> threads;
        threads.reserve(pool - 1);
        for (std::size_t i = 0; i + 1 < pool; ++i) threads.emplace_back(drain);
        drain();
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

}  // namespace fadefuse::parallel
