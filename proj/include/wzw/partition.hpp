#pragma once

#include <vector>

namespace wzw {

// Time partition 0 = t_0 < t_1 < ... < t_N = T. Cell c (0-based) is
// [t_c, t_{c+1}]. Most runs use uniform partitions but nothing below assumes
// equal widths.
class Partition {
public:
    Partition() : nodes_{0.0} {} // empty placeholder, zero cells
    static Partition uniform(double horizon, int cells);
    static Partition from_nodes(std::vector<double> nodes);

    int cells() const { return static_cast<int>(nodes_.size()) - 1; }
    double horizon() const { return nodes_.back(); }
    double node(int i) const { return nodes_[static_cast<size_t>(i)]; }
    const std::vector<double>& nodes() const { return nodes_; }
    double width(int cell) const { return nodes_[cell + 1] - nodes_[cell]; }
    double mesh() const; // max cell width

    // Cell containing t, with node hits resolved to the left cell for t > 0
    // (so cell_of(t_k) = k-1, matching closed-open integration segments that
    // end at t). t must lie in [0, T] up to a small tolerance.
    int cell_of(double t) const;

    // True if t coincides with a partition node (within tolerance).
    bool is_node(double t) const;

private:
    explicit Partition(std::vector<double> nodes) : nodes_(std::move(nodes)) {}
    std::vector<double> nodes_;
};

} // namespace wzw
