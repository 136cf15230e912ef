#include "wzw/brownian.hpp"

#include "wzw/philox.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <ostream>
#include <stdexcept>

namespace wzw {

namespace {

uint64_t fnv1a(const void* data, size_t bytes, uint64_t h = 1469598103934665603ull) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace

size_t BrownianPath::index_of(double t) const {
    const double tol = 1e-9 * std::max(1.0, horizon);
    // uniform-grid guess first, binary search as fallback
    const double dt = times[1] - times[0];
    const auto guess = static_cast<size_t>(std::llround(std::max(0.0, t / dt)));
    if (guess < times.size() && std::abs(times[guess] - t) <= tol) return guess;
    auto it = std::lower_bound(times.begin(), times.end(), t - tol);
    if (it == times.end() || std::abs(*it - t) > tol)
        throw std::invalid_argument("BrownianPath::index_of: time not on the fine grid");
    return static_cast<size_t>(it - times.begin());
}

double BrownianPath::at(int comp, double t) const {
    if (t < 0.0 || t > horizon + 1e-12)
        throw std::domain_error("BrownianPath::at: time outside [0, T]");
    const double dt = times[1] - times[0];
    const auto k = std::min(times.size() - 2, static_cast<size_t>(std::max(0.0, t / dt)));
    const double lam = (t - times[k]) / (times[k + 1] - times[k]);
    return (1.0 - lam) * value(comp, k) + lam * value(comp, k + 1);
}

uint64_t BrownianPath::digest() const {
    uint64_t h = fnv1a(&seed, sizeof seed);
    h = fnv1a(&path_index, sizeof path_index, h);
    h = fnv1a(values.data(), values.size() * sizeof(double), h);
    return h;
}

BrownianPath sample_brownian(int dim, double horizon, size_t steps, uint64_t seed,
                             uint64_t path_index) {
    if (!(horizon > 0.0)) throw std::invalid_argument("sample_brownian: horizon must be positive");
    if (steps < 1) throw std::invalid_argument("sample_brownian: need at least one step");
    std::vector<double> times(steps + 1);
    for (size_t k = 0; k <= steps; ++k)
        times[k] = horizon * static_cast<double>(k) / static_cast<double>(steps);
    return sample_brownian_on(dim, std::move(times), seed, path_index);
}

BrownianPath sample_brownian_on(int dim, std::vector<double> times, uint64_t seed,
                                uint64_t path_index) {
    if (dim < 1) throw std::invalid_argument("sample_brownian_on: dim must be >= 1");
    if (times.size() < 2 || std::abs(times.front()) > 1e-15)
        throw std::invalid_argument("sample_brownian_on: grid must start at 0");
    for (size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1]))
            throw std::invalid_argument("sample_brownian_on: grid must be strictly increasing");
    if (times.size() - 1 > 0xFFFFFFFFull)
        throw std::invalid_argument("sample_brownian_on: grid too large for the counter layout");

    BrownianPath p;
    p.dim = dim;
    p.horizon = times.back();
    p.times = std::move(times);
    p.seed = seed;
    p.path_index = path_index;
    const size_t n = p.times.size();
    p.values.assign(static_cast<size_t>(dim) * n, 0.0);
    for (int c = 0; c < dim; ++c) {
        double b = 0.0;
        double* row = p.values.data() + static_cast<size_t>(c) * n;
        row[0] = 0.0;
        for (size_t k = 1; k < n; ++k) {
            const double dt = p.times[k] - p.times[k - 1];
            b += std::sqrt(dt) * philox::gaussian(seed, path_index, static_cast<uint32_t>(c),
                                                  static_cast<uint32_t>(k - 1));
            row[k] = b;
        }
    }
    return p;
}

double polygonal_eval(const BrownianPath& path, const Partition& pi, int comp, double t) {
    if (comp < 0 || comp >= path.dim)
        throw std::invalid_argument("polygonal_eval: component out of range");
    const int c = pi.cell_of(t); // throws for t outside [0, T]
    const double t0 = pi.node(c), t1 = pi.node(c + 1);
    const double b0 = path.value(comp, path.index_of(t0));
    const double b1 = path.value(comp, path.index_of(t1));
    const double lam = (t - t0) / (t1 - t0);
    return (1.0 - lam) * b0 + lam * b1;
}

IncrementTable partition_increments(const BrownianPath& path, const Partition& pi) {
    if (pi.horizon() > path.horizon + 1e-12)
        throw std::invalid_argument("partition_increments: partition exceeds path horizon");
    IncrementTable tab{path.dim, pi, {}, path.digest()};
    const int N = pi.cells();
    tab.z.assign(static_cast<size_t>(path.dim) * N, 0.0);
    for (int c = 0; c < path.dim; ++c)
        for (int k = 0; k < N; ++k) {
            const double b0 = path.value(c, path.index_of(pi.node(k)));
            const double b1 = path.value(c, path.index_of(pi.node(k + 1)));
            tab.at(c, k) = b1 - b0;
        }
    return tab;
}

void dump_csv(const BrownianPath& path, std::ostream& os) {
    os << "component,node,value\n";
    char buf[64];
    for (int c = 0; c < path.dim; ++c)
        for (size_t k = 0; k < path.times.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%d,%zu,%.17g\n", c, k, path.value(c, k));
            os << buf;
        }
}

void dump_csv(const IncrementTable& table, std::ostream& os) {
    os << "component,cell,value\n";
    char buf[64];
    for (int c = 0; c < table.dim; ++c)
        for (int k = 0; k < table.partition.cells(); ++k) {
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", c, k, table(c, k));
            os << buf;
        }
}

} // namespace wzw
