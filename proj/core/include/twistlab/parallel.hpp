#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace twistlab {

/// Thread budget: TWISTLAB_THREADS if set, else hardware concurrency.
inline unsigned thread_budget() {
    if (const char* env = std::getenv("TWISTLAB_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// max-reduction over [0, count). fn(i) must be independent of evaluation
/// order (each index derives its own rng substream), so chunking cannot
/// change the result: max is exact under any association.
inline double parallel_max(size_t count, const std::function<double(size_t)>& fn) {
    unsigned threads = std::min<size_t>(thread_budget(), std::max<size_t>(count / 256, 1));
    if (threads <= 1) {
        double m = 0.0;
        for (size_t i = 0; i < count; ++i) m = std::max(m, fn(i));
        return m;
    }
    std::vector<double> partial(threads, 0.0);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            double m = 0.0;
            for (size_t i = t; i < count; i += threads) m = std::max(m, fn(i));
            partial[t] = m;
        });
    }
    for (auto& th : pool) th.join();
    double m = 0.0;
    for (double v : partial) m = std::max(m, v);
    return m;
}

} // namespace twistlab
