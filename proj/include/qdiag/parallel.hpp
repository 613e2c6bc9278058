#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <utility>
#include <vector>

namespace qdiag::detail {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Run body(block_index, begin, end) over [0, n) split into fixed-size
/// blocks. The block layout depends only on (n, block_size), never on the
/// thread count, so callers that write per-block slots and combine them in
/// block order get bit-identical results for any scheduling.
template <typename Body>
void for_each_block(std::uint64_t n, std::uint64_t block_size, int threads, Body&& body) {
    if (n == 0) return;
    const std::uint64_t nblocks = (n + block_size - 1) / block_size;
    const int nthreads = std::min<std::uint64_t>(resolve_threads(threads), nblocks);
    auto run_block = [&](std::uint64_t b) {
        const std::uint64_t begin = b * block_size;
        const std::uint64_t end = std::min(n, begin + block_size);
        body(b, begin, end);
    };
    if (nthreads <= 1) {
        for (std::uint64_t b = 0; b < nblocks; ++b) run_block(b);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t)
        pool.emplace_back([&] {
            for (std::uint64_t b = next.fetch_add(1); b < nblocks; b = next.fetch_add(1))
                run_block(b);
        });
    for (std::thread& t : pool) t.join();
}

} // namespace qdiag::detail
