#include "wzw/fokker_planck.hpp"

#include "wzw/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wzw {

namespace {

// (1 - xi^2)^3 on [-1, 1]: polynomial inside the support, value and first
// two derivatives vanish at the edge. Keeping the interior kink-free matters
// for the telescoped residual, whose quadrature error would otherwise be
// dominated by a third-derivative jump at the bump center.
double bump(double xi) {
    if (std::abs(xi) >= 1.0) return 0.0;
    const double w = 1.0 - xi * xi;
    return w * w * w;
}
double bump1(double xi) {
    if (std::abs(xi) >= 1.0) return 0.0;
    const double w = 1.0 - xi * xi;
    return -6.0 * xi * w * w;
}
double bump2(double xi) {
    if (std::abs(xi) >= 1.0) return 0.0;
    const double w = 1.0 - xi * xi;
    return w * (30.0 * xi * xi - 6.0);
}

} // namespace

double TestFunction::value(double t, std::span<const double> x) const {
    const double span = t_hi - t_lo;
    double v = amplitude * bump(2.0 * (t - t_lo) / span - 1.0);
    for (size_t j = 0; j < center.size(); ++j)
        v *= bump((x[j] - center[j]) / halfwidth[j]);
    return v;
}

double TestFunction::dt(double t, std::span<const double> x) const {
    const double span = t_hi - t_lo;
    double v = amplitude * bump1(2.0 * (t - t_lo) / span - 1.0) * 2.0 / span;
    for (size_t j = 0; j < center.size(); ++j)
        v *= bump((x[j] - center[j]) / halfwidth[j]);
    return v;
}

void TestFunction::grad(double t, std::span<const double> x, std::span<double> out) const {
    const size_t d = center.size();
    const double span = t_hi - t_lo;
    const double tau = amplitude * bump(2.0 * (t - t_lo) / span - 1.0);
    for (size_t i = 0; i < d; ++i) {
        double v = tau;
        for (size_t j = 0; j < d; ++j) {
            const double xi = (x[j] - center[j]) / halfwidth[j];
            v *= j == i ? bump1(xi) / halfwidth[j] : bump(xi);
        }
        out[i] = v;
    }
}

void TestFunction::hess(double t, std::span<const double> x, std::span<double> out) const {
    const size_t d = center.size();
    const double span = t_hi - t_lo;
    const double tau = amplitude * bump(2.0 * (t - t_lo) / span - 1.0);
    for (size_t i = 0; i < d; ++i)
        for (size_t l = i; l < d; ++l) {
            double v = tau;
            for (size_t j = 0; j < d; ++j) {
                const double xi = (x[j] - center[j]) / halfwidth[j];
                if (j == i && j == l)
                    v *= bump2(xi) / (halfwidth[j] * halfwidth[j]);
                else if (j == i || j == l)
                    v *= bump1(xi) / halfwidth[j];
                else
                    v *= bump(xi);
            }
            out[i * d + l] = v;
            out[l * d + i] = v;
        }
}

bool TestFunction::inside(std::span<const double> x) const {
    for (size_t j = 0; j < center.size(); ++j)
        if (std::abs(x[j] - center[j]) >= halfwidth[j]) return false;
    return true;
}

TestFunction make_bump(std::string name, std::vector<double> center,
                       std::vector<double> halfwidth, double t_lo, double t_hi,
                       double amplitude) {
    if (center.size() != halfwidth.size() || center.empty())
        throw std::invalid_argument("make_bump: center/halfwidth size mismatch");
    if (!(t_hi > t_lo)) throw std::invalid_argument("make_bump: empty time support");
    for (double w : halfwidth)
        if (!(w > 0.0)) throw std::invalid_argument("make_bump: halfwidth must be positive");
    TestFunction f;
    f.name = std::move(name);
    f.center = std::move(center);
    f.halfwidth = std::move(halfwidth);
    f.t_lo = t_lo;
    f.t_hi = t_hi;
    f.amplitude = amplitude;
    return f;
}

std::vector<TestFunction> default_bumps(const CoefficientSet& cs, double horizon) {
    const int d = cs.dim;
    const double sig = cs.sigma_sup();
    std::vector<TestFunction> out;
    // widths cover roughly 4-6 sigma of relative spread around the start
    const double spreads[3] = {4.0, 5.5, 3.0};
    const char* names[3] = {"bump-wide", "bump-wider", "bump-tight"};
    for (int k = 0; k < 3; ++k) {
        std::vector<double> center(cs.init), hw(d);
        for (int i = 0; i < d; ++i) {
            const double scale = std::max(0.25, std::abs(cs.init[i]));
            hw[i] = spreads[k] * (sig * std::sqrt(horizon) * scale + 0.1) +
                    cs.bound_M * horizon;
            if (k == 2) center[i] += 0.3 * hw[i]; // off-center probe
        }
        out.push_back(make_bump(names[k], center, hw, 0.0, horizon));
    }
    return out;
}

std::vector<FpReport> estimate_terms(const CoefficientSet& cs, const Partition& pi,
                                     const std::vector<TestFunction>& phis, size_t n_paths,
                                     size_t fine_steps, uint64_t seed, const SolverConfig& cfg,
                                     int quad_nodes, int threads) {
    const int d = cs.dim;
    const size_t nb = phis.size();
    if (nb == 0) throw std::invalid_argument("estimate_terms: no test functions");
    for (const auto& phi : phis)
        if (static_cast<int>(phi.center.size()) != d)
            throw std::invalid_argument("estimate_terms: test function dimension mismatch");
    const double T = pi.horizon();

    struct Slot {
        std::vector<double> a, b, c, d, g, resid, resid_half, resid_dbl, cover;
    };
    std::vector<Slot> slots(nb);
    for (auto& s : slots) {
        s.a.resize(n_paths);
        s.b.resize(n_paths);
        s.c.resize(n_paths);
        s.d.resize(n_paths);
        s.g.resize(n_paths);
        s.resid.resize(n_paths);
        s.resid_half.resize(n_paths);
        s.resid_dbl.resize(n_paths);
        s.cover.resize(n_paths);
    }

    stats::parallel_chunks(n_paths, threads, [&](size_t lo, size_t hi) {
        const auto& gl = quad::gauss_legendre(quad_nodes);
        const auto& gl_half = quad::gauss_legendre(std::max(1, quad_nodes / 2));
        const auto& gl_dbl = quad::gauss_legendre(2 * quad_nodes);
        std::vector<double> u(d), jac(d * d), gphi(d), hphi(d * d), bvec(d), zero(d, 0.0);
        // per-bump accumulators for one path
        std::vector<double> a(nb), b(nb), c(nb), dd(nb), g(nb), tele_h(nb), tele_d(nb);
        std::vector<size_t> in_support(nb);

        // accumulate w * d/dt phi(t, u) - style terms of the telescoped
        // integral for one quadrature rule into out[]
        auto telescope_only = [&](const WzFields& wf, const IncrementTable& increments,
                                  const quad::Rule& rule, std::vector<double>& out) {
            std::fill(out.begin(), out.end(), 0.0);
            for (int k = 0; k < pi.cells(); ++k) {
                const double mid = 0.5 * (pi.node(k) + pi.node(k + 1));
                const double half = 0.5 * pi.width(k);
                const double h = pi.width(k);
                const CellField& field = wf.fields[k];
                for (size_t q = 0; q < rule.nodes.size(); ++q) {
                    const double t = mid + half * rule.nodes[q];
                    const double w = half * rule.weights[q];
                    field.eval(t, u);
                    field.eval_jacobian(t, zero, jac);
                    for (size_t f = 0; f < nb; ++f) {
                        const TestFunction& phi = phis[f];
                        phi.grad(t, u, gphi);
                        cs.eval_drift(t, u, bvec);
                        double acc = phi.dt(t, u);
                        for (int i = 0; i < d; ++i) {
                            const double sig = cs.sigma[i].value(t);
                            acc += gphi[i] * (sig * (increments(i, k) / h) * u[i] -
                                              sig * jac[i * d + i] + bvec[i]);
                        }
                        out[f] += w * acc;
                    }
                }
            }
        };

        for (size_t pidx = lo; pidx < hi; ++pidx) {
            const BrownianPath path = sample_brownian(d, T, fine_steps, seed, pidx);
            const IncrementTable increments = partition_increments(path, pi);
            const WzFields wf =
                build_wz_fields(cs, pi, path, std::vector<double>{}, cfg, true);

            std::fill(a.begin(), a.end(), 0.0);
            std::fill(b.begin(), b.end(), 0.0);
            std::fill(c.begin(), c.end(), 0.0);
            std::fill(dd.begin(), dd.end(), 0.0);
            std::fill(g.begin(), g.end(), 0.0);
            std::fill(in_support.begin(), in_support.end(), 0);
            size_t points = 0;
            for (int k = 0; k < pi.cells(); ++k) {
                const double mid = 0.5 * (pi.node(k) + pi.node(k + 1));
                const double half = 0.5 * pi.width(k);
                const double h = pi.width(k);
                const CellField& field = wf.fields[k];
                for (size_t q = 0; q < gl.nodes.size(); ++q) {
                    const double t = mid + half * gl.nodes[q];
                    const double w = half * gl.weights[q];
                    field.eval(t, u);
                    field.eval_jacobian(t, zero, jac);
                    cs.eval_drift(t, u, bvec);
                    ++points;
                    for (size_t f = 0; f < nb; ++f) {
                        const TestFunction& phi = phis[f];
                        phi.grad(t, u, gphi);
                        phi.hess(t, u, hphi);
                        a[f] += w * phi.dt(t, u);
                        if (phi.inside(u)) ++in_support[f];
                        for (int i = 0; i < d; ++i) {
                            const double sig = cs.sigma[i].value(t);
                            b[f] += w * gphi[i] * sig * jac[i * d + i];
                            c[f] += w * gphi[i] * sig * (increments(i, k) / h) * u[i];
                            dd[f] += w * gphi[i] * bvec[i];
                            for (int j = 0; j < d; ++j)
                                g[f] += w * sig * hphi[j * d + i] * jac[j * d + i] * u[i];
                        }
                    }
                }
            }
            telescope_only(wf, increments, gl_half, tele_h);
            telescope_only(wf, increments, gl_dbl, tele_d);

            const auto xT = wf.traj.node_state(pi.cells());
            for (size_t f = 0; f < nb; ++f) {
                const TestFunction& phi = phis[f];
                const double jump = phi.value(T, xT) - phi.value(0.0, cs.init);
                Slot& s = slots[f];
                s.a[pidx] = a[f];
                s.b[pidx] = b[f];
                s.c[pidx] = c[f];
                s.d[pidx] = dd[f];
                s.g[pidx] = g[f];
                s.resid[pidx] = std::abs((a[f] - b[f] + c[f] + dd[f]) - jump);
                s.resid_half[pidx] = std::abs(tele_h[f] - jump);
                s.resid_dbl[pidx] = std::abs(tele_d[f] - jump);
                s.cover[pidx] =
                    static_cast<double>(in_support[f]) / static_cast<double>(points);
            }
        }
    });

    std::vector<FpReport> out;
    out.reserve(nb);
    for (size_t f = 0; f < nb; ++f) {
        const Slot& s = slots[f];
        FpReport rep;
        rep.phi_name = phis[f].name;
        rep.n_paths = n_paths;
        const auto ma = stats::mean_se(s.a), mb = stats::mean_se(s.b),
                   mc = stats::mean_se(s.c), md = stats::mean_se(s.d),
                   mg = stats::mean_se(s.g);
        rep.a = {ma.mean, ma.se};
        rep.b = {mb.mean, mb.se};
        rep.c = {mc.mean, mc.se};
        rep.d = {md.mean, md.se};
        rep.combo = ma.mean - mb.mean + mc.mean + md.mean;
        rep.combo_se =
            std::sqrt(ma.se * ma.se + mb.se * mb.se + mc.se * mc.se + md.se * md.se);
        rep.combo_z = rep.combo_se > 0.0 ? rep.combo / rep.combo_se : 0.0;
        rep.ibp_lhs = mc.mean;
        rep.ibp_rhs = mg.mean + mb.mean;
        rep.ibp_se = std::sqrt(mc.se * mc.se + mg.se * mg.se + mb.se * mb.se);
        rep.ibp_z = rep.ibp_se > 0.0 ? (rep.ibp_lhs - rep.ibp_rhs) / rep.ibp_se : 0.0;
        rep.max_pathwise_resid = *std::max_element(s.resid.begin(), s.resid.end());
        rep.max_pathwise_resid_half =
            *std::max_element(s.resid_half.begin(), s.resid_half.end());
        rep.max_pathwise_resid_dbl =
            *std::max_element(s.resid_dbl.begin(), s.resid_dbl.end());
        rep.support_coverage = stats::mean_se(s.cover).mean;
        out.push_back(std::move(rep));
    }
    return out;
}

} // namespace wzw
