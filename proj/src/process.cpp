#include "wzw/process.hpp"

#include "wzw/errors.hpp"
#include "wzw/philox.hpp"
#include "wzw/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wzw {

namespace {

std::vector<double> sorted_unique_times(std::span<const double> v, double horizon) {
    std::vector<double> out(v.begin(), v.end());
    const double tol = 1e-12 * std::max(1.0, horizon);
    for (double t : out)
        if (t < -tol || t > horizon + tol)
            throw std::domain_error("sample time outside [0, T]");
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [tol](double a, double b) { return std::abs(a - b) <= tol; }),
              out.end());
    return out;
}

size_t find_time(const std::vector<double>& times, double t, const char* what) {
    const double tol = 1e-9;
    auto it = std::lower_bound(times.begin(), times.end(), t - tol);
    if (it == times.end() || std::abs(*it - t) > tol)
        throw std::invalid_argument(std::string(what) + ": time was not sampled");
    return static_cast<size_t>(it - times.begin());
}

} // namespace

std::vector<double> WzTrajectory::value_at(double t) const {
    const size_t k = find_time(times, t, "WzTrajectory::value_at");
    return {values.begin() + k * dim, values.begin() + (k + 1) * dim};
}

std::span<const double> WzTrajectory::node_state(int node) const {
    return {node_values.data() + static_cast<size_t>(node) * dim, static_cast<size_t>(dim)};
}

std::vector<double> ItoTrajectory::value_at(double t) const {
    const size_t k = find_time(times, t, "ItoTrajectory::value_at");
    return {values.begin() + k * dim, values.begin() + (k + 1) * dim};
}

namespace {

WzFields build_wz_impl(const CoefficientSet& cs, const Partition& pi, const BrownianPath& path,
                       std::span<const double> sample_times, const SolverConfig& cfg,
                       bool want_fields, bool want_jacobian) {
    if (cs.dim != path.dim) throw std::invalid_argument("build_wz: dimension mismatch");
    if (pi.horizon() > path.horizon + 1e-12)
        throw std::invalid_argument("build_wz: partition exceeds path horizon");

    WzFields out;
    WzTrajectory& traj = out.traj;
    traj.dim = cs.dim;
    traj.partition = pi;
    traj.times = sorted_unique_times(sample_times, pi.horizon());
    traj.values.assign(traj.times.size() * cs.dim, 0.0);
    traj.node_values.assign(static_cast<size_t>(pi.cells() + 1) * cs.dim, 0.0);
    traj.path_digest = path.digest();
    traj.seed = path.seed;
    traj.path_index = path.path_index;

    const IncrementTable increments = partition_increments(path, pi);
    const bool use_fan = cfg.backend == "fan" && !want_fields;

    std::vector<double> state = cs.init;
    std::copy(state.begin(), state.end(), traj.node_values.begin());

    // sample times grouped by owning cell (node hits resolve to the left cell
    // and coincide with that cell's apex value)
    size_t next_sample = 0;
    // t = 0 samples are the initial state
    while (next_sample < traj.times.size() && pi.cell_of(traj.times[next_sample]) == 0 &&
           traj.times[next_sample] <= 1e-12 * std::max(1.0, pi.horizon())) {
        std::copy(state.begin(), state.end(), traj.values.begin() + next_sample * cs.dim);
        ++next_sample;
    }

    std::vector<double> x(cs.dim), val(cs.dim);
    for (int c = 0; c < pi.cells(); ++c) {
        PdeProblem p{&cs, pi.node(c), pi.node(c + 1), pi.width(c), state};
        for (int i = 0; i < cs.dim; ++i) x[i] = increments(i, c);

        if (use_fan) {
            while (next_sample < traj.times.size() &&
                   pi.cell_of(traj.times[next_sample]) == c) {
                const auto v = fan_value(p, traj.times[next_sample], x, cfg);
                std::copy(v.begin(), v.end(), traj.values.begin() + next_sample * cs.dim);
                ++next_sample;
            }
            state = fan_value(p, pi.node(c + 1), x, cfg);
        } else {
            out.fields.emplace_back(p, x, cfg, want_jacobian);
            const CellField& field = out.fields.back();
            while (next_sample < traj.times.size() &&
                   pi.cell_of(traj.times[next_sample]) == c) {
                field.eval(traj.times[next_sample], val);
                std::copy(val.begin(), val.end(), traj.values.begin() + next_sample * cs.dim);
                ++next_sample;
            }
            field.eval(pi.node(c + 1), val);
            state = val;
            if (!want_fields) out.fields.clear();
        }
        std::copy(state.begin(), state.end(),
                  traj.node_values.begin() + static_cast<size_t>(c + 1) * cs.dim);
    }
    return out;
}

} // namespace

WzTrajectory build_wz(const CoefficientSet& cs, const Partition& pi, const BrownianPath& path,
                      std::span<const double> sample_times, const SolverConfig& cfg) {
    return build_wz_impl(cs, pi, path, sample_times, cfg, false, false).traj;
}

WzFields build_wz_fields(const CoefficientSet& cs, const Partition& pi,
                         const BrownianPath& path, std::span<const double> sample_times,
                         const SolverConfig& cfg, bool want_jacobian) {
    return build_wz_impl(cs, pi, path, sample_times, cfg, true, want_jacobian);
}

ItoTrajectory build_ito(const CoefficientSet& cs, const BrownianPath& path,
                        std::span<const double> sample_times, const std::string& scheme,
                        size_t stride) {
    if (cs.dim != path.dim) throw std::invalid_argument("build_ito: dimension mismatch");
    if (stride < 1 || (path.times.size() - 1) % stride != 0)
        throw std::invalid_argument("build_ito: stride must divide the fine step count");

    ItoTrajectory traj;
    traj.dim = cs.dim;
    traj.times = sorted_unique_times(sample_times, path.horizon);
    traj.values.assign(traj.times.size() * cs.dim, 0.0);
    traj.path_digest = path.digest();
    traj.scheme = scheme;

    if (scheme == "exact-gbm") {
        if (cs.bound_M != 0.0)
            throw std::invalid_argument("build_ito: exact-gbm requires zero drift");
        for (size_t k = 0; k < traj.times.size(); ++k)
            for (int i = 0; i < cs.dim; ++i) {
                const double e = traj.times[k] == 0.0
                                     ? 1.0
                                     : stoch_exp_ito({i, 0.0, traj.times[k], +1}, cs, path);
                traj.values[k * cs.dim + i] = cs.init[i] * e;
            }
        return traj;
    }
    if (scheme != "euler")
        throw std::invalid_argument("build_ito: unknown scheme '" + scheme + "'");

    // sample indices on the thinned grid
    std::vector<size_t> sample_idx(traj.times.size());
    for (size_t k = 0; k < traj.times.size(); ++k) {
        const size_t idx = path.index_of(traj.times[k]);
        if (idx % stride != 0)
            throw std::invalid_argument("build_ito: sample time not on the thinned grid");
        sample_idx[k] = idx;
    }

    std::vector<double> state = cs.init, b(cs.dim);
    size_t next_sample = 0;
    const size_t steps = (path.times.size() - 1) / stride;
    for (size_t m = 0; m <= steps; ++m) {
        const size_t idx = m * stride;
        while (next_sample < traj.times.size() && sample_idx[next_sample] == idx) {
            std::copy(state.begin(), state.end(),
                      traj.values.begin() + next_sample * cs.dim);
            ++next_sample;
        }
        if (m == steps) break;
        const double tau = path.times[idx];
        const double dt = path.times[idx + stride] - tau;
        cs.eval_drift(tau, state, b);
        for (int i = 0; i < cs.dim; ++i) {
            const double db = path.value(i, idx + stride) - path.value(i, idx);
            state[i] += b[i] * dt + cs.sigma[i].value(tau) * state[i] * db;
        }
    }
    return traj;
}

stats::MeanSE l1_error(std::span<const WzTrajectory> wz, std::span<const ItoTrajectory> ito,
                       double t) {
    if (wz.empty() || wz.size() != ito.size())
        throw std::invalid_argument("l1_error: ensembles empty or of different size");
    std::vector<double> diffs(wz.size());
    for (size_t p = 0; p < wz.size(); ++p) {
        if (wz[p].path_digest != ito[p].path_digest)
            throw std::invalid_argument("l1_error: uncoupled ensembles (path digests differ)");
        const auto a = wz[p].value_at(t);
        const auto b = ito[p].value_at(t);
        double d = 0.0;
        for (int i = 0; i < wz[p].dim; ++i) d += std::abs(a[i] - b[i]);
        diffs[p] = d;
    }
    return stats::mean_se(diffs);
}

std::vector<double> mild_residual(const CoefficientSet& cs, const Partition& pi,
                                  const BrownianPath& path, double t, const SolverConfig& cfg,
                                  int quad_nodes) {
    const int d = cs.dim;
    const int k = pi.cell_of(t);
    const double r = pi.node(k);
    const IncrementTable increments = partition_increments(path, pi);

    // chain states through earlier cells, then solve the owning cell
    const WzFields wf = build_wz_fields(cs, pi, path, std::vector<double>{t}, cfg);
    const CellField& field = wf.fields[k];
    const std::vector<double> lhs = wf.traj.value_at(t);
    const std::span<const double> prev = wf.traj.node_state(k);

    std::vector<double> rhs(d, 0.0), a(d, 0.0), u_shift(d), b(d);
    for (int i = 0; i < d; ++i) {
        const StochExpSpec spec{i, r, t, +1};
        // first term, translation route: X(t_{k-1}) rebuilt as a functional of
        // the (shifted) increment table times the exponential
        PathFunctional prev_i;
        prev_i.eval = [&, i](const IncrementTable& tab) {
            // rebuild the chain up to t_{k-1} on the given table; reads cells
            // 0..k-1 only
            std::vector<double> st = cs.init;
            std::vector<double> xx(d), vv(d);
            for (int c = 0; c < k; ++c) {
                PdeProblem p{&cs, pi.node(c), pi.node(c + 1), pi.width(c), st};
                for (int j = 0; j < d; ++j) xx[j] = tab(j, c);
                const CellField f(p, xx, cfg);
                f.eval(pi.node(c + 1), vv);
                st = vv;
            }
            return st[i];
        };
        for (int c = 0; c < k; ++c)
            for (int j = 0; j < d; ++j) prev_i.deps.emplace_back(j, c);
        const double wick_route = wick_mul_exp(prev_i, spec, cs, increments);
        const double plain_route = prev[i] * stoch_exp_pi(spec, cs, increments);
        // disjoint dependencies make the two routes identical; any difference
        // is a real defect and must show up in the residual
        rhs[i] = wick_route + (wick_route - plain_route);
    }

    const auto& gl = quad::gauss_legendre(quad_nodes);
    const double mid = 0.5 * (r + t), half = 0.5 * (t - r);
    if (half > 0.0) {
        for (size_t c = 0; c < gl.nodes.size(); ++c) {
            const double s = mid + half * gl.nodes[c];
            for (int i = 0; i < d; ++i) {
                std::fill(a.begin(), a.end(), 0.0);
                a[i] = sigma_integral(cs.sigma[i], s, t);
                field.eval_shifted(s, a, u_shift);
                cs.eval_drift(s, u_shift, b);
                rhs[i] += gl.weights[c] * half * b[i] *
                          stoch_exp_pi({i, s, t, +1}, cs, increments);
            }
        }
    }
    for (int i = 0; i < d; ++i) rhs[i] -= lhs[i];
    return rhs;
}

std::vector<double> solution_residual_global(const CoefficientSet& cs, const Partition& pi,
                                             const BrownianPath& path, double t,
                                             const SolverConfig& cfg, int quad_nodes) {
    const int d = cs.dim;
    const int k = pi.cell_of(t);
    const IncrementTable increments = partition_increments(path, pi);
    const WzFields wf = build_wz_fields(cs, pi, path, std::vector<double>{t}, cfg);
    const std::vector<double> lhs = wf.traj.value_at(t);

    std::vector<double> rhs(d), a(d, 0.0), u_shift(d), b(d);
    for (int i = 0; i < d; ++i) rhs[i] = cs.init[i] * stoch_exp_pi({i, 0.0, t, +1}, cs, increments);

    const auto& gl = quad::gauss_legendre(quad_nodes);
    for (int c = 0; c <= k; ++c) {
        const double seg_lo = pi.node(c), seg_hi = std::min(t, pi.node(c + 1));
        const double mid = 0.5 * (seg_lo + seg_hi), half = 0.5 * (seg_hi - seg_lo);
        if (half <= 0.0) continue;
        const CellField& field = wf.fields[c];
        for (size_t q = 0; q < gl.nodes.size(); ++q) {
            const double s = mid + half * gl.nodes[q];
            for (int i = 0; i < d; ++i) {
                // Wick integrand: the only cell of [s, t] that X^pi(s) reads
                // is cell c, whose shift is the sigma integral over [s, seg_hi]
                std::fill(a.begin(), a.end(), 0.0);
                a[i] = sigma_integral(cs.sigma[i], s, seg_hi);
                field.eval_shifted(s, a, u_shift);
                cs.eval_drift(s, u_shift, b);
                rhs[i] += gl.weights[q] * half * b[i] *
                          stoch_exp_pi({i, s, t, +1}, cs, increments);
            }
        }
    }
    for (int i = 0; i < d; ++i) rhs[i] -= lhs[i];
    return rhs;
}

LpBoundResult lp_bound_first_cell(const CoefficientSet& cs, const Partition& pi, double p,
                                  double t, size_t n_paths, uint64_t seed,
                                  const SolverConfig& cfg) {
    const int d = cs.dim;
    const double t1 = pi.node(1);
    if (!(t > 0.0) || t > t1 + 1e-12)
        throw std::domain_error("lp_bound_first_cell: t must lie in the first cell");
    if (!(cs.bound_M < std::numeric_limits<double>::infinity()))
        throw std::invalid_argument("lp_bound_first_cell: drift must be bounded");

    LpBoundResult res;
    res.p = p;
    std::vector<std::vector<double>> powers(d, std::vector<double>(n_paths));
    PdeProblem prob{&cs, 0.0, t1, pi.width(0), cs.init};
    std::vector<double> z(d);
    for (size_t path = 0; path < n_paths; ++path) {
        for (int i = 0; i < d; ++i)
            z[i] = std::sqrt(t1) * philox::gaussian(seed, path, i, 0);
        const auto x = fan_value(prob, t, z, cfg);
        for (int i = 0; i < d; ++i) powers[i][path] = std::pow(std::abs(x[i]), p);
    }

    res.estimate.resize(d);
    res.se.resize(d);
    res.bound.resize(d);
    res.ok = true;
    for (int i = 0; i < d; ++i) {
        const auto ms = stats::mean_se(powers[i]);
        res.estimate[i] = std::pow(ms.mean, 1.0 / p);
        // delta method for m^(1/p)
        res.se[i] = ms.mean > 0.0
                        ? (1.0 / p) * std::pow(ms.mean, 1.0 / p - 1.0) * ms.se
                        : 0.0;
        const double S0t = sigma_integral(cs.sigma[i], 0.0, t);
        double sup_sq = 0.0;
        for (int m = 0; m <= 64; ++m) {
            const double s = t * m / 64.0;
            const double S = sigma_integral(cs.sigma[i], s, t);
            sup_sq = std::max(sup_sq, S * S);
        }
        const double h = pi.width(0);
        res.bound[i] = std::abs(cs.init[i]) * std::exp(p * S0t * S0t / (2.0 * h)) +
                       cs.bound_M * t * std::exp(p * sup_sq / (2.0 * h));
        if (res.estimate[i] > res.bound[i] + 3.0 * res.se[i]) res.ok = false;
    }
    return res;
}

GronwallResult gronwall_check(const CoefficientSet& cs, const Partition& pi, double t,
                              size_t n_paths, size_t fine_steps, uint64_t seed,
                              const SolverConfig& cfg) {
    const int d = cs.dim;
    const double T = pi.horizon();
    if (fine_steps % pi.cells() != 0)
        throw std::invalid_argument("gronwall_check: fine grid must refine the partition");

    std::vector<double> l1(n_paths), dist(n_paths);
    std::vector<double> b_pi(d), b_ito(d), xt(d);

    for (size_t pidx = 0; pidx < n_paths; ++pidx) {
        const BrownianPath path = sample_brownian(d, T, fine_steps, seed, pidx);
        const IncrementTable increments = partition_increments(path, pi);

        const WzTrajectory traj = build_wz(cs, pi, path, std::vector<double>{t}, cfg);
        const std::vector<double> xpi_t = traj.value_at(t);

        // full Euler record on the fine grid
        const size_t nt = path.times.size();
        std::vector<double> euler(nt * d);
        {
            std::vector<double> st = cs.init, b(d);
            std::copy(st.begin(), st.end(), euler.begin());
            for (size_t m = 0; m + 1 < nt; ++m) {
                const double tau = path.times[m], dt = path.times[m + 1] - tau;
                cs.eval_drift(tau, st, b);
                for (int i = 0; i < d; ++i) {
                    const double db = path.value(i, m + 1) - path.value(i, m);
                    st[i] += b[i] * dt + cs.sigma[i].value(tau) * st[i] * db;
                }
                std::copy(st.begin(), st.end(), euler.begin() + (m + 1) * d);
            }
        }
        const size_t t_idx = path.index_of(t);
        double acc_l1 = 0.0;
        for (int i = 0; i < d; ++i) acc_l1 += std::abs(xpi_t[i] - euler[t_idx * d + i]);
        l1[pidx] = acc_l1;

        // mild-data distance: initial exponential gap plus integrand gaps on
        // the fine grid (left Riemann)
        double acc = 0.0;
        for (int i = 0; i < d; ++i)
            acc += std::abs(cs.init[i]) *
                   std::abs(stoch_exp_pi({i, 0.0, t, +1}, cs, increments) -
                            stoch_exp_ito({i, 0.0, t, +1}, cs, path));
        std::vector<double> st(d), bb(d), ito_state(d);
        for (size_t m = 0; m < t_idx; ++m) {
            const double tau = path.times[m], dt = path.times[m + 1] - tau;
            // midpoint keeps steps that start exactly at a partition node in
            // the right-hand cell
            const int cell = pi.cell_of(tau + 0.5 * dt);
            const double cell_end = std::min(t, pi.node(cell + 1));
            const size_t cell_start = path.index_of(pi.node(cell));
            for (int i = 0; i < d; ++i) {
                // approximant-side integrand: the Wick shift reaches back into
                // the current cell as a linear ramp on the driving increments,
                // so the Ito state is re-run over [t_cell, tau] with shifted
                // increments of component i
                const double kernel =
                    sigma_integral(cs.sigma[i], tau, cell_end) / pi.width(cell);
                std::copy(euler.begin() + cell_start * d, euler.begin() + (cell_start + 1) * d,
                          st.begin());
                for (size_t mm = cell_start; mm < m; ++mm) {
                    const double tau2 = path.times[mm], dt2 = path.times[mm + 1] - tau2;
                    cs.eval_drift(tau2, st, bb);
                    for (int j = 0; j < d; ++j) {
                        double db = path.value(j, mm + 1) - path.value(j, mm);
                        if (j == i) db -= kernel * dt2;
                        st[j] += bb[j] * dt2 + cs.sigma[j].value(tau2) * st[j] * db;
                    }
                }
                cs.eval_drift(tau, st, b_pi);
                std::copy(euler.begin() + m * d, euler.begin() + (m + 1) * d,
                          ito_state.begin());
                cs.eval_drift(tau, ito_state, b_ito);
                const double g_pi =
                    b_pi[i] * stoch_exp_pi({i, tau, t, +1}, cs, increments);
                const double g_ito = b_ito[i] * stoch_exp_ito({i, tau, t, +1}, cs, path);
                acc += dt * std::abs(g_pi - g_ito);
            }
        }
        dist[pidx] = acc;
    }

    GronwallResult res;
    res.l1 = stats::mean_se(l1);
    res.data_dist = stats::mean_se(dist);
    res.factor = std::exp(cs.lipschitz_L * d * t);
    res.ok = res.l1.mean <=
             res.factor * res.data_dist.mean + 3.0 * (res.l1.se + res.factor * res.data_dist.se);
    return res;
}

} // namespace wzw
