#pragma once

#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rsm {

/// Worker count: RSM_THREADS if set, otherwise the hardware concurrency.
inline std::size_t worker_count() {
    std::size_t hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("RSM_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<std::size_t>(v);
    }
    return hw;
}

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries only
/// depend on n and the worker count, and callers write to disjoint slots, so
/// results do not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, F&& body, std::size_t min_chunk = 256) {
    std::size_t workers = worker_count();
    if (workers <= 1 || n < 2 * min_chunk) {
        if (n) body(std::size_t(0), n);
        return;
    }
    std::size_t chunks = std::min(workers, (n + min_chunk - 1) / min_chunk);
    std::size_t step = (n + chunks - 1) / chunks;
    std::vector<std::thread> threads;
    std::exception_ptr failure;
    std::mutex m;
    for (std::size_t c = 0; c < chunks; ++c) {
        std::size_t lo = c * step, hi = std::min(n, lo + step);
        if (lo >= hi) break;
        threads.emplace_back([&, lo, hi] {
            try {
                body(lo, hi);
            } catch (...) {
                std::lock_guard<std::mutex> g(m);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace rsm
