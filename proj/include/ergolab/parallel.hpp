#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ergolab {

/// Number of reduction blocks. Fixed (never derived from the worker count or
/// the machine) so that partial results exist on the same grid no matter how
/// many threads run, and folding them in block order gives bit-identical
/// output for 1 worker and for 16.
inline constexpr int kReductionBlocks = 64;

struct BlockRange {
    std::int64_t lo;  // inclusive
    std::int64_t hi;  // exclusive
};

/// Split [0, count) into at most kReductionBlocks contiguous ranges.
inline std::vector<BlockRange> reduction_blocks(std::int64_t count) {
    const std::int64_t nb = count < kReductionBlocks ? (count > 0 ? count : 0)
                                                     : kReductionBlocks;
    std::vector<BlockRange> blocks;
    blocks.reserve(static_cast<std::size_t>(nb));
    for (std::int64_t b = 0; b < nb; ++b) {
        blocks.push_back({count * b / nb, count * (b + 1) / nb});
    }
    return blocks;
}

/// Run body(block_index, range) for every block, on `workers` threads.
/// Blocks are claimed dynamically, so the caller must keep per-block state
/// and fold it in block order after this returns; the fold order — not the
/// scheduling — is what the determinism contract rests on.
/// Exceptions from the body are captured and rethrown on the calling thread.
inline void run_blocks(const std::vector<BlockRange>& blocks, int workers,
                       const std::function<void(int, BlockRange)>& body) {
    const int nb = static_cast<int>(blocks.size());
    if (nb == 0) return;
    if (workers <= 1 || nb == 1) {
        for (int b = 0; b < nb; ++b) body(b, blocks[static_cast<std::size_t>(b)]);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const int b = next.fetch_add(1, std::memory_order_relaxed);
            if (b >= nb || failed.load(std::memory_order_relaxed)) return;
            try {
                body(b, blocks[static_cast<std::size_t>(b)]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int spawn = workers < nb ? workers : nb;
    pool.reserve(static_cast<std::size_t>(spawn));
    for (int t = 0; t < spawn; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace ergolab
