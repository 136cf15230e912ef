#pragma once

#include "wzw/partition.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace wzw {

// A d-component Brownian path tabulated on a fine uniform grid. Increments
// are drawn with the counter-based generator keyed by (seed, path_index), so
// the same ids reproduce the same path on any machine and thread layout.
struct BrownianPath {
    int dim = 0;
    double horizon = 0.0;
    std::vector<double> times;  // fine nodes, size steps+1
    std::vector<double> values; // component-major, values[c * times.size() + k]
    uint64_t seed = 0;
    uint64_t path_index = 0;

    double value(int comp, size_t idx) const { return values[comp * times.size() + idx]; }

    // Exact index of a grid time; throws if t is not a fine node.
    size_t index_of(double t) const;

    // Linear interpolation between fine nodes (the path itself is only
    // defined on the grid; this is for plotting, not simulation).
    double at(int comp, double t) const;

    // FNV-1a digest over the raw sample bytes; lets consumers assert that
    // two trajectories were built from the same driving noise.
    uint64_t digest() const;
};

// Samples a path on a uniform fine grid with `steps` intervals over [0, T].
BrownianPath sample_brownian(int dim, double horizon, size_t steps, uint64_t seed,
                             uint64_t path_index);

// Same, on an arbitrary strictly increasing grid starting at 0.
BrownianPath sample_brownian_on(int dim, std::vector<double> times, uint64_t seed,
                                uint64_t path_index);

// Polygonal (piecewise-linear in t over partition cells) approximation built
// from the path's values at partition nodes.
double polygonal_eval(const BrownianPath& path, const Partition& pi, int comp, double t);

// Per-cell increments Z_i(c) = B_i(t_{c+1}) - B_i(t_c).
struct IncrementTable {
    int dim = 0;
    Partition partition;
    std::vector<double> z; // component-major, z[comp * cells + cell]
    uint64_t path_digest = 0;

    double operator()(int comp, int cell) const { return z[comp * partition.cells() + cell]; }
    double& at(int comp, int cell) { return z[comp * partition.cells() + cell]; }
};

// Builds the increment table for a partition whose nodes all lie on the
// path's fine grid; throws if any node is misaligned.
IncrementTable partition_increments(const BrownianPath& path, const Partition& pi);

// Flat dumps for replay (columns: component, node index, value).
void dump_csv(const BrownianPath& path, std::ostream& os);
void dump_csv(const IncrementTable& table, std::ostream& os);

} // namespace wzw
