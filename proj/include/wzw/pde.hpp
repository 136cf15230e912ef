#pragma once

#include "wzw/coefficients.hpp"

#include <span>
#include <string>
#include <vector>

namespace wzw {

struct SolverConfig {
    int quad_nodes = 8;        // Gauss-Legendre order for sweep integrals
    int picard_max = 12;       // max fixed-point sweeps (or fan depth)
    double picard_tol = 1e-10; // sup-norm stopping tolerance
    double fd_step = 0.0;      // finite-difference step; 0 = cbrt(eps)*(1+|x|)
    int s_nodes = 0;           // time axis order; 0 = auto
    int shift_nodes = 0;       // backtracking axis order; 0 = auto
    std::string backend = "collocation"; // "collocation" | "fan"

    double fd_step_for(double x) const;
};

// One transport problem on an interval [r, t_end]: the semilinear system
//   d/dt u_i = (sigma_i(t)/h) * (x_i - d/dx_i) u_i + b_i(t, u),  u(r, .) = alpha,
// whose mild form propagates constant data alpha with the exponential factor
//   E_i(s, t, x_i) = exp( (x_i/h) S_i(s,t) - S_i(s,t)^2 / (2h) ),
//   S_i(s, t) = int_s^t sigma_i.
// h is the width of the governing partition cell (for uniform partitions,
// the mesh).
struct PdeProblem {
    const CoefficientSet* cs = nullptr;
    double r = 0.0;
    double t_end = 0.0;
    double h = 0.0;
    std::vector<double> alpha;

    double exp_factor(int comp, double s, double t, double y) const;
    // log of the factor above (exact; no overflow guard)
    double exp_factor_log(int comp, double s, double t, double y) const;
};

// Picard-collocation solution of the mild equation, anchored at an apex
// point x. Values are stored on a tensor grid over
//   { (s, a) : a_j = c_j mu_j, mu_j >= 0, sum_j mu_j <= t_end - s },
// the set swept by iterated characteristic backtracking from (t_end, x)
// (a_j is the accumulated shift in component j; c_j carries sigma_j's sign
// and sup). The set is closed under the child map
// (s, a) -> (tau, a + S_j(tau, s) e_j), so sweeps never extrapolate.
// Requires each sigma_j to be single-signed on [r, t_end].
class CellField {
public:
    CellField(const PdeProblem& p, std::span<const double> x_apex, const SolverConfig& cfg,
              bool want_jacobian = false);

    int dim() const { return dim_; }
    const PdeProblem& problem() const { return prob_; }
    std::span<const double> apex() const { return x_; }

    // u(s, x_apex - a); throws std::domain_error if (s, a) leaves the grid.
    void eval_shifted(double s, std::span<const double> a, std::span<double> out) const;
    // u(s, x_apex)
    void eval(double s, std::span<double> out) const;
    // Jacobian d u_i / d x_l (row-major) at (s, x_apex - a); solved from the
    // variational (linearized) system, available when want_jacobian was set.
    void eval_jacobian(double s, std::span<const double> a, std::span<double> out) const;

    // sup-norm update sizes per sweep, starting with sweep 1
    const std::vector<double>& residual_history() const { return residuals_; }

private:
    friend std::vector<double> mild_residual_u(const CellField&, double, int);
    friend double growth_bound_margin(const CellField&, double, int);

    struct Axis {
        std::vector<double> nodes;
        std::vector<double> bary;
    };

    void solve(const SolverConfig& cfg);
    void solve_jacobian(const SolverConfig& cfg);
    void node_coords(size_t flat, double& s, std::vector<double>& a) const;
    void read_coords(double s, std::span<const double> a,
                     std::vector<std::vector<double>>& card) const;
    void interp(const std::vector<double>& table, int stride, double s,
                std::span<const double> a, std::span<double> out) const;

    PdeProblem prob_;
    int dim_;
    std::vector<double> x_;
    std::vector<double> scale_; // c_j (signed sigma sup); 0 for degenerate axes
    Axis s_axis_;
    std::vector<Axis> xi_axes_;
    size_t nodes_total_ = 0;
    std::vector<double> u_;    // nodes_total * dim
    std::vector<double> jac_;  // nodes_total * dim * dim, when solved
    std::vector<double> residuals_;
    bool has_jacobian_ = false;
    int quad_nodes_ = 8;
};

// One-shot mild solution u(t, x) for t in [p.r, p.t_end].
std::vector<double> eval_u(const PdeProblem& p, double t, std::span<const double> x,
                           const SolverConfig& cfg);

// Jacobian d u_i / d x_l (row-major) via the variational system.
std::vector<double> eval_u_grad(const PdeProblem& p, double t, std::span<const double> x,
                                const SolverConfig& cfg);

// Depth-adaptive recursive evaluation of the Picard series at a single point.
// Each level resolves one mild-form integral by Gauss-Legendre and recurses
// on the shifted argument; truncation depth comes from the factorial tail
// bound M (t-r) (L (t-r))^k / k!, so the drift must be bounded.
std::vector<double> fan_value(const PdeProblem& p, double t, std::span<const double> x,
                              const SolverConfig& cfg);

// right-hand side minus stored value of the mild identity at (t, x_apex),
// evaluated with an independently chosen quadrature order.
std::vector<double> mild_residual_u(const CellField& field, double t, int quad_nodes);

// min over components of [ |alpha_i| E_i(r,t,x_i) + M int_r^t E_i(s,t,x_i) ds ]
// - |u_i(t, x_apex)|; nonnegative (up to roundoff) for bounded drifts.
double growth_bound_margin(const CellField& field, double t, int quad_nodes = 24);

} // namespace wzw
