#pragma once

#include <functional>
#include <vector>

namespace wzw::quad {

struct Rule {
    std::vector<double> nodes;   // on [-1,1] (Legendre) or weight-specific support
    std::vector<double> weights;
};

// Gauss-Legendre rule on [-1,1]. Results are cached per order.
const Rule& gauss_legendre(int n);

// Gauss-Hermite rule for weight exp(-x^2/2)/sqrt(2*pi), i.e. weights sum to 1.
// Used for expectations of functions of a standard normal.
const Rule& gauss_hermite(int n);

// Integral of f over [a,b] with an n-point Gauss-Legendre rule.
double integrate(const std::function<double(double)>& f, double a, double b, int n);

// Chebyshev-Gauss-Lobatto nodes mapped to [a,b], ascending. n >= 1; n == 1
// returns the midpoint.
std::vector<double> chebyshev_lobatto(double a, double b, int n);

// Barycentric weights for an arbitrary node set (small n only).
std::vector<double> barycentric_weights(const std::vector<double>& nodes);

// Cardinal-function values l_j(x) for barycentric interpolation on the given
// nodes, written to out (resized to nodes.size()).
void barycentric_cardinal(const std::vector<double>& nodes, const std::vector<double>& w,
                          double x, std::vector<double>& out);

} // namespace wzw::quad
