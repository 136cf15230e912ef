#include "wzw/partition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wzw {

namespace {
constexpr double kNodeTol = 1e-12;
}

Partition Partition::uniform(double horizon, int cells) {
    if (!(horizon > 0.0)) throw std::invalid_argument("Partition: horizon must be positive");
    if (cells < 1) throw std::invalid_argument("Partition: need at least one cell");
    std::vector<double> nodes(cells + 1);
    for (int i = 0; i <= cells; ++i)
        nodes[i] = horizon * static_cast<double>(i) / static_cast<double>(cells);
    return Partition(std::move(nodes));
}

Partition Partition::from_nodes(std::vector<double> nodes) {
    if (nodes.size() < 2) throw std::invalid_argument("Partition: need at least two nodes");
    if (std::abs(nodes.front()) > kNodeTol)
        throw std::invalid_argument("Partition: first node must be 0");
    for (size_t i = 1; i < nodes.size(); ++i)
        if (!(nodes[i] > nodes[i - 1]))
            throw std::invalid_argument("Partition: nodes must be strictly increasing");
    nodes.front() = 0.0;
    return Partition(std::move(nodes));
}

double Partition::mesh() const {
    double m = 0.0;
    for (int c = 0; c < cells(); ++c) m = std::max(m, width(c));
    return m;
}

int Partition::cell_of(double t) const {
    const double T = horizon();
    const double tol = kNodeTol * std::max(1.0, T);
    if (t < -tol || t > T + tol) throw std::domain_error("Partition::cell_of: time outside [0, T]");
    t = std::clamp(t, 0.0, T);
    if (t <= tol) return 0; // t = 0 has no left cell
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t - tol);
    int idx = static_cast<int>(it - nodes_.begin());
    if (idx > 0 && std::abs(nodes_[idx] - t) <= tol) return std::min(idx - 1, cells() - 1);
    if (idx == 0) return 0;
    return std::min(idx - 1, cells() - 1);
}

bool Partition::is_node(double t) const {
    const double tol = kNodeTol * std::max(1.0, horizon());
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t - tol);
    return it != nodes_.end() && std::abs(*it - t) <= tol;
}

} // namespace wzw
