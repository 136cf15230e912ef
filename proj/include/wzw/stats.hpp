#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace wzw::stats {

struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
    size_t n = 0;
};

// Pairwise (cascade) sum. Used everywhere a reduction feeds a reported number
// so results do not depend on how work was split across threads.
double pairwise_sum(std::span<const double> v);

MeanSE mean_se(std::span<const double> v);

// Sample variance (unbiased) via pairwise sums.
double sample_variance(std::span<const double> v);

// Runs fn(begin, end) over contiguous chunks of [0, n) on the requested
// number of threads. Chunking depends only on (n, threads); workers write to
// disjoint slots, so any reduction done afterwards is deterministic.
void parallel_chunks(size_t n, int threads, const std::function<void(size_t, size_t)>& fn);

} // namespace wzw::stats
