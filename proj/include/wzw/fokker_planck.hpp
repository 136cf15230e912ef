#pragma once

#include "wzw/process.hpp"

#include <span>
#include <string>
#include <vector>

namespace wzw {

// Compactly supported C^2 test function: a product of per-component bumps
// (1 - xi^2)^3 in x times the same profile in t over [t_lo, t_hi]. Value and
// first two derivatives vanish at the support boundary, so the time
// modulation kills the boundary terms of the weak identity, and the profile
// is polynomial inside the support.
struct TestFunction {
    std::string name;
    std::vector<double> center;
    std::vector<double> halfwidth;
    double t_lo = 0.0;
    double t_hi = 1.0;
    double amplitude = 1.0;

    double value(double t, std::span<const double> x) const;
    double dt(double t, std::span<const double> x) const;
    void grad(double t, std::span<const double> x, std::span<double> out) const;
    // second x-derivatives, row-major d*d (symmetric)
    void hess(double t, std::span<const double> x, std::span<double> out) const;
    bool inside(std::span<const double> x) const;
};

TestFunction make_bump(std::string name, std::vector<double> center,
                       std::vector<double> halfwidth, double t_lo, double t_hi,
                       double amplitude = 1.0);

// Three bumps around the initial condition at staggered widths, sized so a
// diffusion started at c with the given sigma scale mostly stays inside.
std::vector<TestFunction> default_bumps(const CoefficientSet& cs, double horizon);

struct FpTerm {
    double estimate = 0.0;
    double se = 0.0;
};

// Monte Carlo estimates of the four terms of the weak identity
//   0 = E[A] - E[B] + E[C] + E[D],
//   A = sum_k int dt_phi(t, u_k),
//   B = sum_k sum_i int d_i phi * sigma_i * d_i u_i,
//   C = sum_k sum_i int d_i phi * sigma_i * (Z_i(k)/h_k) * u_i,
//   D = sum_k sum_i int d_i phi * b_i(t, u_k),
// with u_k the cell solution evaluated at the cell increment. The combo
// z-score uses the pooled standard error sqrt(sum se^2): the combination is
// pathwise exact, so a paired error estimate would be pure quadrature noise.
// The per-cell Gaussian integration-by-parts identity
//   E[C] = E[sum_ij sigma_i * d_ij phi * d_i u_j * u_i] + E[B]
// is reported as a second z-score on independent statistics.
struct FpReport {
    std::string phi_name;
    FpTerm a, b, c, d;
    double combo = 0.0;    // a - b + c + d
    double combo_se = 0.0; // pooled
    double combo_z = 0.0;
    double ibp_lhs = 0.0;  // C estimate
    double ibp_rhs = 0.0;  // gradient term + B estimate
    double ibp_se = 0.0;   // pooled over the difference
    double ibp_z = 0.0;
    // max over paths of |(A - B + C + D) - (phi(T, X(T)) - phi(0, c))|,
    // bounded by time-quadrature error plus the cell-solver error; also
    // evaluated at half and double the rule so the quadrature order shows
    double max_pathwise_resid = 0.0;
    double max_pathwise_resid_half = 0.0;
    double max_pathwise_resid_dbl = 0.0;
    // fraction of quadrature states strictly inside the spatial support
    double support_coverage = 0.0;
    size_t n_paths = 0;
};

// One report per test function; the cell fields are built once per path and
// shared across the functions, which is where nearly all the time goes.
std::vector<FpReport> estimate_terms(const CoefficientSet& cs, const Partition& pi,
                                     const std::vector<TestFunction>& phis, size_t n_paths,
                                     size_t fine_steps, uint64_t seed, const SolverConfig& cfg,
                                     int quad_nodes, int threads = 1);

} // namespace wzw
