#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace bvq {

// Worker cap shared by training and beam search. Resolution order:
// explicit --threads, then BVQ_THREADS, then hardware_concurrency.
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("BVQ_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for i in [0, n). Results must not depend on the split: callers
// keep determinism by writing to per-index slots and reducing in index order
// afterwards.
inline void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    size_t nworkers = std::min<size_t>(static_cast<size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(nworkers);
    for (size_t w = 0; w < nworkers; ++w) {
        pool.emplace_back([&, w] {
            for (size_t i = w; i < n; i += nworkers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace bvq
