#include "wzw/stats.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace wzw::stats {

namespace {

double pairwise_rec(const double* v, size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const size_t half = n / 2;
    return pairwise_rec(v, half) + pairwise_rec(v + half, n - half);
}

} // namespace

double pairwise_sum(std::span<const double> v) { return pairwise_rec(v.data(), v.size()); }

MeanSE mean_se(std::span<const double> v) {
    MeanSE r;
    r.n = v.size();
    if (r.n == 0) return r;
    r.mean = pairwise_sum(v) / static_cast<double>(r.n);
    if (r.n == 1) return r;
    std::vector<double> dev2(r.n);
    for (size_t i = 0; i < r.n; ++i) {
        const double d = v[i] - r.mean;
        dev2[i] = d * d;
    }
    const double var = pairwise_sum(dev2) / static_cast<double>(r.n - 1);
    r.se = std::sqrt(var / static_cast<double>(r.n));
    return r;
}

double sample_variance(std::span<const double> v) {
    if (v.size() < 2) throw std::invalid_argument("sample_variance: need at least 2 samples");
    const double mean = pairwise_sum(v) / static_cast<double>(v.size());
    std::vector<double> dev2(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        const double d = v[i] - mean;
        dev2[i] = d * d;
    }
    return pairwise_sum(dev2) / static_cast<double>(v.size() - 1);
}

void parallel_chunks(size_t n, int threads, const std::function<void(size_t, size_t)>& fn) {
    if (threads < 1) threads = 1;
    if (n == 0) return;
    const size_t t = std::min<size_t>(static_cast<size_t>(threads), n);
    if (t == 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(t);
    const size_t chunk = (n + t - 1) / t;
    std::vector<std::exception_ptr> errors(t);
    for (size_t k = 0; k < t; ++k) {
        const size_t b = k * chunk, e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&, k, b, e] {
            try {
                fn(b, e);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
}

} // namespace wzw::stats
