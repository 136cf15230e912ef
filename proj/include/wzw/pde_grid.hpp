#pragma once

#include "wzw/pde.hpp"

#include <span>
#include <vector>

namespace wzw {

// Uniform tensor grid for the damped unknown v(t, x) = u(t, x) e^{-|x|^2/(2h)}.
// d <= 2 only; the grid should extend a few Gaussian widths past any point
// that will be read back, so edge effects stay buried in the tail.
struct GridSpec {
    std::vector<double> lo;   // per component
    std::vector<double> hi;
    std::vector<int> points;  // per component, >= 8
    int time_steps = 64;
};

struct GridSolution {
    GridSpec spec;
    double h = 1.0;        // Gaussian weight width, copied from the problem
    std::vector<double> v; // component-major over flattened grid
    double value(int comp, std::span<const int> idx) const;
    // v divided back by the Gaussian weight, i.e. the reconstructed u
    double u_value(int comp, std::span<const int> idx) const;
    std::vector<double> grid_point(std::span<const int> idx) const;
};

// Semi-Lagrangian march of the damped transport system: each step traces the
// component's characteristic back by the sigma increment (pure translation
// for v; the exponential factor cancels against the Gaussian weight) and adds
// the drift source with a midpoint predictor. Cubic interpolation at the
// feet; where the stencil leaves the grid, the drift-free translated
// Gaussian stands in for the missing tail values.
GridSolution grid_solve_v(const PdeProblem& p, const GridSpec& spec);

} // namespace wzw
