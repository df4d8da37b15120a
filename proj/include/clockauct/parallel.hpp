#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace clockauct {

inline int default_worker_count() {
    if (const char* env = std::getenv("CLOCKAUCT_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(trial) for trial = 0..trials-1, writing each result into a slot
/// indexed by trial. Work is split into contiguous blocks per worker, so the
/// returned vector is identical for any worker count: merging happens by
/// trial index, never by completion order.
template <typename T, typename Fn>
std::vector<T> parallel_trials(long trials, Fn&& fn, int workers = default_worker_count()) {
    std::vector<T> out(static_cast<std::size_t>(trials));
    if (trials <= 0) return out;
    if (workers <= 1 || trials == 1) {
        for (long t = 0; t < trials; ++t) out[static_cast<std::size_t>(t)] = fn(t);
        return out;
    }
    if (workers > trials) workers = static_cast<int>(trials);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const long block = (trials + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const long lo = w * block;
        const long hi = std::min(trials, lo + block);
        if (lo >= hi) break;
        pool.emplace_back([&out, &fn, lo, hi] {
            for (long t = lo; t < hi; ++t) out[static_cast<std::size_t>(t)] = fn(t);
        });
    }
    for (auto& th : pool) th.join();
    return out;
}

} // namespace clockauct
