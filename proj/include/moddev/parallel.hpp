#ifndef MODDEV_PARALLEL_HPP
#define MODDEV_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "moddev/rng.hpp"

namespace moddev {

/// Thread count from MODDEV_THREADS, falling back to the hardware count.
inline int default_thread_count() {
    if (const char* env = std::getenv("MODDEV_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

struct RepOutcome {
    double y = 0.0;    // estimator term (weight * indicator, or indicator)
    double w = 1.0;    // importance weight
    bool hit = false;  // indicator value
};

struct McAccum {
    double sum_y = 0.0;
    double sum_y2 = 0.0;
    double sum_w = 0.0;
    long hits = 0;
    double max_w_hit = 0.0;

    void add(const RepOutcome& o) {
        sum_y += o.y;
        sum_y2 += o.y * o.y;
        sum_w += o.w;
        if (o.hit) {
            ++hits;
            max_w_hit = std::max(max_w_hit, o.w);
        }
    }

    void merge(const McAccum& o) {
        sum_y += o.sum_y;
        sum_y2 += o.sum_y2;
        sum_w += o.sum_w;
        hits += o.hits;
        max_w_hit = std::max(max_w_hit, o.max_w_hit);
    }
};

/// Runs `fn(rng, index)` for every replication index in [0, samples) and
/// reduces the outcomes. Replications are grouped into fixed-size blocks;
/// blocks are claimed dynamically by workers but accumulated internally in
/// index order and merged in block order, and every replication draws from
/// its own (seed, index)-derived stream. The reduction is therefore
/// bit-identical for any thread count.
template <typename Fn>
McAccum run_replications(long samples, std::uint64_t seed, int threads, Fn&& fn) {
    constexpr long kBlock = 4096;
    if (samples <= 0) return {};
    threads = std::max(1, threads);
    const long num_blocks = (samples + kBlock - 1) / kBlock;
    std::vector<McAccum> block_acc(num_blocks);

    std::atomic<long> next{0};
    auto worker = [&]() {
        for (;;) {
            const long blk = next.fetch_add(1, std::memory_order_relaxed);
            if (blk >= num_blocks) return;
            const long lo = blk * kBlock;
            const long hi = std::min(samples, lo + kBlock);
            McAccum acc;
            for (long i = lo; i < hi; ++i) {
                Rng rng = Rng::for_replication(seed, static_cast<std::uint64_t>(i));
                acc.add(fn(rng, i));
            }
            block_acc[blk] = acc;
        }
    };

    if (threads == 1 || num_blocks == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const int use = static_cast<int>(std::min<long>(threads, num_blocks));
        pool.reserve(use);
        for (int t = 0; t < use; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    McAccum total;
    for (const auto& acc : block_acc) total.merge(acc);
    return total;
}

}  // namespace moddev

#endif
