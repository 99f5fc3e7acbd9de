#pragma once

#include <cstddef>
#include <thread>
#include <vector>

#include "dwh/types.hpp"

namespace dwh {

/// Worker cap: min(DWH_THREADS if set, hardware concurrency), at least 1.
std::size_t max_workers();

/// Runs fn(begin, end) over contiguous chunks of [0, n). The chunk layout
/// depends only on n and the worker count, so results reduced in chunk order
/// are bit-reproducible at a fixed thread count.
template <typename Fn>
std::size_t parallel_chunks(Index n, Fn&& fn) {
    if (n <= 0) return 0;
    const std::size_t workers =
        std::min<std::size_t>(max_workers(), static_cast<std::size_t>(n));
    if (workers <= 1) {
        fn(Index{0}, n, std::size_t{0});
        return 1;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const Index base = n / static_cast<Index>(workers);
    const Index extra = n % static_cast<Index>(workers);
    Index begin = 0;
    for (std::size_t w = 0; w < workers; ++w) {
        const Index len = base + (static_cast<Index>(w) < extra ? 1 : 0);
        const Index end = begin + len;
        pool.emplace_back([&fn, begin, end, w] { fn(begin, end, w); });
        begin = end;
    }
    for (auto& t : pool) t.join();
    return workers;
}

}  // namespace dwh
