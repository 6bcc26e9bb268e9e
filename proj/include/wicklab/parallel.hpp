// Batch-parallel map with deterministic assembly. Work is split into fixed
// batches; threads pull batches, results merge in batch order, so the output
// is independent of scheduling. WICKLAB_THREADS caps the worker count.
#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace wicklab {

inline int worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    int n = hw == 0 ? 1 : int(hw);
    if (const char* env = std::getenv("WICKLAB_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1 && cap < n) n = cap;
    }
    return n;
}

// Runs fn(batch_index) for batch_index in [0, batches).
inline void parallel_batches(long batches, const std::function<void(long)>& fn) {
    int workers = worker_count();
    if (workers <= 1 || batches <= 1) {
        for (long b = 0; b < batches; ++b) fn(b);
        return;
    }
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                long b = next.fetch_add(1);
                if (b >= batches) return;
                fn(b);
            }
        });
    }
    for (auto& th : pool) th.join();
}

// Pairwise-combinable mean/variance accumulator (Welford + Chan merge).
struct Accumulator {
    long count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        double d = x - mean;
        mean += d / double(count);
        m2 += d * (x - mean);
    }

    void merge(const Accumulator& o) {
        if (o.count == 0) return;
        if (count == 0) {
            *this = o;
            return;
        }
        double d = o.mean - mean;
        long n = count + o.count;
        mean += d * double(o.count) / double(n);
        m2 += o.m2 + d * d * double(count) * double(o.count) / double(n);
        count = n;
    }

    double variance() const { return count > 1 ? m2 / double(count - 1) : 0.0; }
    double stderr_of_mean() const {
        return count > 1 ? std::sqrt(variance() / double(count)) : 0.0;
    }
};

} // namespace wicklab
