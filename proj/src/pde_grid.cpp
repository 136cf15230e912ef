#include "wzw/pde_grid.hpp"

#include "wzw/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wzw {

namespace {

double catmull_rom(double p0, double p1, double p2, double p3, double t) {
    return p1 + 0.5 * t *
                    (p2 - p0 +
                     t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                          t * (3.0 * (p1 - p2) + p3 - p0)));
}

struct GridGeom {
    int dim;
    std::vector<double> lo, hi, dx;
    std::vector<int> n;
    size_t total;

    explicit GridGeom(const GridSpec& spec) {
        dim = static_cast<int>(spec.points.size());
        lo = spec.lo;
        hi = spec.hi;
        n = spec.points;
        total = 1;
        for (int j = 0; j < dim; ++j) {
            if (n[j] < 8) throw std::invalid_argument("grid_solve_v: need >= 8 points per axis");
            if (!(hi[j] > lo[j])) throw std::invalid_argument("grid_solve_v: empty axis range");
            dx.push_back((hi[j] - lo[j]) / (n[j] - 1));
            total *= static_cast<size_t>(n[j]);
        }
    }

    double coord(int j, int idx) const { return lo[j] + dx[j] * idx; }
};

// cubic interpolation of one component's level; returns false if the foot
// has no full 4-point stencil inside the grid on some axis
bool interp_level(const GridGeom& g, const double* level, const double* foot, double& out) {
    int base[2] = {0, 0};
    double frac[2] = {0.0, 0.0};
    for (int j = 0; j < g.dim; ++j) {
        const double u = (foot[j] - g.lo[j]) / g.dx[j];
        const int i = static_cast<int>(std::floor(u));
        if (i < 1 || i > g.n[j] - 3) return false;
        base[j] = i;
        frac[j] = u - i;
    }
    if (g.dim == 1) {
        const int i = base[0];
        out = catmull_rom(level[i - 1], level[i], level[i + 1], level[i + 2], frac[0]);
        return true;
    }
    const int n1 = g.n[1];
    double rows[4];
    for (int r = -1; r <= 2; ++r) {
        const double* row = level + static_cast<size_t>(base[0] + r) * n1;
        const int i = base[1];
        rows[r + 1] = catmull_rom(row[i - 1], row[i], row[i + 1], row[i + 2], frac[1]);
    }
    out = catmull_rom(rows[0], rows[1], rows[2], rows[3], frac[0]);
    return true;
}

} // namespace

double GridSolution::value(int comp, std::span<const int> idx) const {
    const GridGeom g(spec);
    size_t flat = 0;
    for (int j = 0; j < g.dim; ++j) flat = flat * g.n[j] + idx[j];
    return v[comp * g.total + flat];
}

double GridSolution::u_value(int comp, std::span<const int> idx) const {
    const GridGeom g(spec);
    size_t flat = 0;
    double norm2 = 0.0;
    for (int j = 0; j < g.dim; ++j) {
        flat = flat * g.n[j] + idx[j];
        const double x = g.coord(j, idx[j]);
        norm2 += x * x;
    }
    return v[comp * g.total + flat] * std::exp(norm2 / (2.0 * h));
}

std::vector<double> GridSolution::grid_point(std::span<const int> idx) const {
    const GridGeom g(spec);
    std::vector<double> x(g.dim);
    for (int j = 0; j < g.dim; ++j) x[j] = g.coord(j, idx[j]);
    return x;
}

GridSolution grid_solve_v(const PdeProblem& p, const GridSpec& spec) {
    if (!p.cs) throw std::invalid_argument("grid_solve_v: coefficient set is null");
    const int d = p.cs->dim;
    if (d > 2) throw std::invalid_argument("grid_solve_v: only d <= 2 supported");
    if (static_cast<int>(spec.points.size()) != d ||
        static_cast<int>(spec.lo.size()) != d || static_cast<int>(spec.hi.size()) != d)
        throw std::invalid_argument("grid_solve_v: spec dimension mismatch");
    if (spec.time_steps < 1) throw std::invalid_argument("grid_solve_v: need time_steps >= 1");

    const GridGeom g(spec);
    const double two_h = 2.0 * p.h;

    // Gaussian weight per grid point, shared by all components
    std::vector<double> weight(g.total), logw(g.total);
    for (size_t flat = 0; flat < g.total; ++flat) {
        double norm2 = 0.0;
        size_t rem = flat;
        for (int j = d - 1; j >= 0; --j) {
            const int i = static_cast<int>(rem % g.n[j]);
            rem /= g.n[j];
            const double x = g.coord(j, i);
            norm2 += x * x;
        }
        logw[flat] = -norm2 / two_h;
        weight[flat] = std::exp(logw[flat]);
    }

    std::vector<double> level(static_cast<size_t>(d) * g.total);
    for (int i = 0; i < d; ++i)
        for (size_t flat = 0; flat < g.total; ++flat)
            level[i * g.total + flat] = p.alpha[i] * weight[flat];

    std::vector<double> next(level.size()), trans(level.size()), g1(level.size());
    std::vector<double> foot(d), u_at(d), b1(d), b2(d), sig0(d);
    const double dt = (p.t_end - p.r) / spec.time_steps;

    // Near the grid edge the cubic stencil runs out of points. There the
    // drift-free closed form is used instead: v_j(s,x) equals alpha_j times
    // the initial Gaussian translated by the accumulated shift sig0[j] along
    // axis j. The drift correction it drops is damped by the same Gaussian
    // tail, so edge cells contribute nothing visible to interior values.
    auto read_v = [&](int comp, const double* ft, double ft_norm2, const double* lvl) {
        double val;
        if (interp_level(g, lvl + static_cast<size_t>(comp) * g.total, ft, val)) return val;
        const double sj = sig0[comp];
        const double e2 = ft_norm2 - 2.0 * ft[comp] * sj + sj * sj;
        return p.alpha[comp] * std::exp(-e2 / two_h);
    };

    for (int step = 0; step < spec.time_steps; ++step) {
        const double s = p.r + dt * step;
        const double s_next = s + dt;
        for (int j = 0; j < d; ++j) sig0[j] = sigma_integral(p.cs->sigma[j], p.r, s);
        // stage 1: translate and evaluate the source at the old level
        for (int i = 0; i < d; ++i) {
            const double shift = sigma_integral(p.cs->sigma[i], s, s_next);
            for (size_t flat = 0; flat < g.total; ++flat) {
                size_t rem = flat;
                double norm2 = 0.0;
                for (int j = d - 1; j >= 0; --j) {
                    const int ii = static_cast<int>(rem % g.n[j]);
                    rem /= g.n[j];
                    foot[j] = g.coord(j, ii);
                }
                foot[i] -= shift;
                for (int j = 0; j < d; ++j) norm2 += foot[j] * foot[j];
                trans[i * g.total + flat] = read_v(i, foot.data(), norm2, level.data());
                // u at the foot, all components, for the drift
                const double foot_logw = -norm2 / two_h;
                if (-foot_logw > 690.0)
                    throw overflow_error("grid_solve_v: Gaussian unweighting overflow");
                for (int j = 0; j < d; ++j)
                    u_at[j] = read_v(j, foot.data(), norm2, level.data()) *
                              std::exp(-foot_logw);
                p.cs->eval_drift(s, u_at, b1);
                g1[i * g.total + flat] = b1[i] * std::exp(foot_logw);
            }
        }
        // predictor
        for (size_t q = 0; q < level.size(); ++q) next[q] = trans[q] + dt * g1[q];
        // stage 2: corrector with the source at the new level
        for (size_t flat = 0; flat < g.total; ++flat) {
            if (-logw[flat] > 690.0)
                throw overflow_error("grid_solve_v: Gaussian unweighting overflow");
            for (int j = 0; j < d; ++j)
                u_at[j] = next[j * g.total + flat] * std::exp(-logw[flat]);
            p.cs->eval_drift(s_next, u_at, b2);
            for (int i = 0; i < d; ++i) {
                const double src2 = b2[i] * weight[flat];
                next[i * g.total + flat] =
                    trans[i * g.total + flat] +
                    0.5 * dt * (g1[i * g.total + flat] + src2);
            }
        }
        level.swap(next);
    }

    GridSolution sol;
    sol.spec = spec;
    sol.h = p.h;
    sol.v = std::move(level);
    return sol;
}

} // namespace wzw
