#pragma once

#include "wzw/brownian.hpp"
#include "wzw/coefficients.hpp"
#include "wzw/pde.hpp"
#include "wzw/stats.hpp"
#include "wzw/wick.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wzw {

// Approximant trajectory: on each partition cell the state is propagated by
// the cell's transport problem evaluated at the cell increment, so X(t) for
// t in cell c is u_c(t, Z(c)) with u_c(t_c, .) = X(t_c).
struct WzTrajectory {
    int dim = 0;
    Partition partition;
    std::vector<double> times;       // sorted, deduplicated sample times
    std::vector<double> values;      // time-major, values[k * dim + i]
    std::vector<double> node_values; // chaining states at partition nodes
    uint64_t path_digest = 0;
    uint64_t seed = 0;
    uint64_t path_index = 0;

    std::vector<double> value_at(double t) const; // throws if t was not sampled
    std::span<const double> node_state(int node) const;
};

// Reference trajectory for the Ito system, same driving path.
struct ItoTrajectory {
    int dim = 0;
    std::vector<double> times;
    std::vector<double> values;
    uint64_t path_digest = 0;
    std::string scheme; // "euler" | "exact-gbm"

    std::vector<double> value_at(double t) const;
};

WzTrajectory build_wz(const CoefficientSet& cs, const Partition& pi, const BrownianPath& path,
                      std::span<const double> sample_times, const SolverConfig& cfg);

// Trajectory plus the per-cell solution fields (needed by consumers that
// evaluate u or its Jacobian inside cells, not just the trajectory values).
struct WzFields {
    WzTrajectory traj;
    std::vector<CellField> fields; // one per cell
};
WzFields build_wz_fields(const CoefficientSet& cs, const Partition& pi,
                         const BrownianPath& path, std::span<const double> sample_times,
                         const SolverConfig& cfg, bool want_jacobian = false);

// scheme "euler": left-point Euler-Maruyama on the path's fine grid thinned
// by `stride`; sample times must lie on the thinned grid.
// scheme "exact-gbm": closed form c_i * exp(int sigma dB - 1/2 int sigma^2),
// valid only for zero drift (throws otherwise).
ItoTrajectory build_ito(const CoefficientSet& cs, const BrownianPath& path,
                        std::span<const double> sample_times, const std::string& scheme,
                        size_t stride = 1);

// mean and standard error of |X^pi(t) - X(t)|_1 over coupled pairs; throws
// std::invalid_argument if the ensembles are not pairwise coupled (checked
// via the stored path digests).
stats::MeanSE l1_error(std::span<const WzTrajectory> wz, std::span<const ItoTrajectory> ito,
                       double t);

// Residual of the per-cell mild identity at time t (t inside cell k):
//   X_i(t) = [X(t_{k-1}) as functional] <> E_i^pi(t_{k-1}, t)
//            + int_{t_{k-1}}^t b_i(s, u_k(s, Z - S_i(s,t) e_i)) E_i^pi(s, t) ds
// evaluated with an independent quadrature order. The first term's Wick
// product is computed both as a plain product and through the translation
// route; their difference (which the disjoint-dependency argument says is
// exactly zero) is folded into the reported residual.
std::vector<double> mild_residual(const CoefficientSet& cs, const Partition& pi,
                                  const BrownianPath& path, double t, const SolverConfig& cfg,
                                  int quad_nodes);

// Residual of the chained (whole-horizon) mild form
//   X_i(t) = c_i E_i^pi(0, t) + sum_cells int b_i(s, .) <> E_i^pi(s, t) ds.
std::vector<double> solution_residual_global(const CoefficientSet& cs, const Partition& pi,
                                             const BrownianPath& path, double t,
                                             const SolverConfig& cfg, int quad_nodes);

// Moment bound on the first cell: for t in [0, t_1] and even p,
//   ||X_i(t)||_p <= |c_i| exp(p S_i(0,t)^2 / (2h))
//                   + M t exp((p/(2h)) sup_{s<=t} S_i(s,t)^2).
struct LpBoundResult {
    double p = 2.0;
    std::vector<double> estimate; // per component, with the MC error below
    std::vector<double> se;       // delta-method standard error of estimate
    std::vector<double> bound;
    bool ok = false; // estimate <= bound + 3 se componentwise
};
LpBoundResult lp_bound_first_cell(const CoefficientSet& cs, const Partition& pi, double p,
                                  double t, size_t n_paths, uint64_t seed,
                                  const SolverConfig& cfg);

// Data-distance Gronwall comparison: bounds mean |X^pi - X|_1 at time t by
// exp(L d t) times the mean L1 distance between the two mild-form data sets
// (initial exponentials plus drift-times-exponential integrands, with the
// approximant-side integrand translated as its Wick product dictates).
struct GronwallResult {
    stats::MeanSE l1;        // measured mean |X^pi - X|_1
    stats::MeanSE data_dist; // estimated mild-data distance
    double factor = 1.0;     // exp(L d t)
    bool ok = false;         // l1 <= factor * data_dist + 3 combined se
};
GronwallResult gronwall_check(const CoefficientSet& cs, const Partition& pi, double t,
                              size_t n_paths, size_t fine_steps, uint64_t seed,
                              const SolverConfig& cfg);

} // namespace wzw
