#include "wzw/pde.hpp"

#include "wzw/errors.hpp"
#include "wzw/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wzw {

namespace {

constexpr double kExpGuard = 700.0;

double checked_exp(double e, const char* what) {
    if (std::abs(e) > kExpGuard)
        throw overflow_error(std::string(what) + ": exponent magnitude exceeds 700");
    return std::exp(e);
}

// Per-level Gauss-Legendre order for the recursive evaluator: full order at
// the top, coarser on the factorially damped deeper levels.
int level_order(int level, int q) {
    if (level == 0) return std::max(2, q);
    if (level == 1) return std::max(3, q / 2);
    if (level == 2) return std::max(2, q / 4);
    return level == 3 ? 2 : 1;
}

} // namespace

double SolverConfig::fd_step_for(double x) const {
    if (fd_step > 0.0) return fd_step;
    return 6.055454452393343e-06 * (1.0 + std::abs(x)); // cbrt(machine eps) scaled
}

double PdeProblem::exp_factor_log(int comp, double s, double t, double y) const {
    const double S = sigma_integral(cs->sigma[comp], s, t);
    return (y / h) * S - S * S / (2.0 * h);
}

double PdeProblem::exp_factor(int comp, double s, double t, double y) const {
    return checked_exp(exp_factor_log(comp, s, t, y), "PdeProblem::exp_factor");
}

// ---------------------------------------------------------------------------
// CellField

CellField::CellField(const PdeProblem& p, std::span<const double> x_apex,
                     const SolverConfig& cfg, bool want_jacobian)
    : prob_(p), dim_(p.cs ? p.cs->dim : 0), x_(x_apex.begin(), x_apex.end()) {
    if (!p.cs) throw std::invalid_argument("CellField: coefficient set is null");
    if (!(p.t_end > p.r)) throw std::invalid_argument("CellField: need r < t_end");
    if (!(p.h > 0.0)) throw std::invalid_argument("CellField: need h > 0");
    if (static_cast<int>(p.alpha.size()) != dim_ || static_cast<int>(x_.size()) != dim_)
        throw std::invalid_argument("CellField: alpha/apex size mismatch");

    // signed sigma envelope per component; sign changes are unsupported
    // because the backtracking domain is parameterized by |shift| / sup|sigma|
    scale_.assign(dim_, 0.0);
    const auto& probe = quad::gauss_legendre(16);
    const double delta = p.t_end - p.r;
    for (int j = 0; j < dim_; ++j) {
        double pos = 0.0, neg = 0.0, sup = 0.0;
        for (double node : probe.nodes) {
            const double tau = p.r + 0.5 * delta * (node + 1.0);
            const double v = p.cs->sigma[j].value(tau);
            pos = std::max(pos, v);
            neg = std::min(neg, v);
            sup = std::max(sup, std::abs(v));
        }
        if (sup < 1e-14) {
            scale_[j] = 0.0; // degenerate axis, no backtracking in j
        } else if (pos > 1e-12 * sup && -neg > 1e-12 * sup) {
            throw std::invalid_argument(
                "CellField: sigma must be single-signed over the cell");
        } else {
            scale_[j] = pos >= -neg ? sup : -sup;
        }
    }

    quad_nodes_ = std::max(2, cfg.quad_nodes);
    const int ns = cfg.s_nodes > 0 ? cfg.s_nodes : std::max(6, cfg.quad_nodes);
    s_axis_.nodes = quad::chebyshev_lobatto(p.r, p.t_end, ns);
    s_axis_.bary = quad::barycentric_weights(s_axis_.nodes);

    const double sig_sup = p.cs->sigma_sup();
    const double kappa =
        sig_sup * sig_sup * delta * delta / p.h + p.cs->lipschitz_L * delta;
    const int nx_auto = std::clamp(4 + static_cast<int>(std::ceil(4.0 * kappa)), 4, 12);
    xi_axes_.resize(dim_);
    nodes_total_ = s_axis_.nodes.size();
    for (int j = 0; j < dim_; ++j) {
        const int nx = scale_[j] == 0.0 ? 1 : (cfg.shift_nodes > 0 ? cfg.shift_nodes : nx_auto);
        xi_axes_[j].nodes = quad::chebyshev_lobatto(0.0, 1.0, nx);
        xi_axes_[j].bary = quad::barycentric_weights(xi_axes_[j].nodes);
        nodes_total_ *= xi_axes_[j].nodes.size();
    }

    u_.assign(nodes_total_ * dim_, 0.0); // integral part only; the exponential
                                         // first term is added exactly on read
    solve(cfg);
    if (want_jacobian) solve_jacobian(cfg);
}

void CellField::node_coords(size_t flat, double& s, std::vector<double>& a) const {
    std::vector<size_t> idx(dim_ + 1);
    for (int j = dim_ - 1; j >= 0; --j) {
        const size_t n = xi_axes_[j].nodes.size();
        idx[j + 1] = flat % n;
        flat /= n;
    }
    idx[0] = flat;
    s = s_axis_.nodes[idx[0]];
    a.assign(dim_, 0.0);
    double cap = prob_.t_end - s;
    for (int j = 0; j < dim_; ++j) {
        if (scale_[j] == 0.0) continue;
        const double mu = xi_axes_[j].nodes[idx[j + 1]] * cap;
        a[j] = scale_[j] * mu;
        cap -= mu;
    }
}

void CellField::read_coords(double s, std::span<const double> a,
                            std::vector<std::vector<double>>& card) const {
    const double span = prob_.t_end - prob_.r;
    if (s < prob_.r - 1e-12 * span || s > prob_.t_end + 1e-12 * span)
        throw std::domain_error("CellField: time outside the cell");
    card.resize(dim_ + 1);
    quad::barycentric_cardinal(s_axis_.nodes, s_axis_.bary, s, card[0]);
    double cap = std::max(0.0, prob_.t_end - s);
    for (int j = 0; j < dim_; ++j) {
        if (scale_[j] == 0.0) {
            if (std::abs(a[j]) > 1e-9 * (1.0 + span))
                throw std::domain_error("CellField: shift along a degenerate axis");
            card[j + 1].assign(1, 1.0);
            continue;
        }
        double mu = a[j] / scale_[j];
        if (mu < -1e-9 * span || mu > cap + 1e-9 * (span + 1.0))
            throw std::domain_error("CellField: shift outside the backtracking domain");
        mu = std::clamp(mu, 0.0, cap);
        const double xi = cap > 1e-300 ? std::clamp(mu / cap, 0.0, 1.0) : 0.0;
        quad::barycentric_cardinal(xi_axes_[j].nodes, xi_axes_[j].bary, xi, card[j + 1]);
        cap -= mu;
    }
}

void CellField::interp(const std::vector<double>& table, int stride, double s,
                       std::span<const double> a, std::span<double> out) const {
    thread_local std::vector<std::vector<double>> card;
    thread_local std::vector<double> w;
    thread_local std::vector<size_t> digits;
    thread_local std::vector<double> partial;
    read_coords(s, a, card);

    // tensor weight per flat node, mixed-radix walk over all axes
    w.resize(nodes_total_);
    digits.assign(dim_ + 1, 0);
    partial.assign(dim_ + 2, 0.0);
    partial[0] = 1.0;
    for (size_t flat = 0; flat < nodes_total_; ++flat) {
        for (int lev = 0; lev <= dim_; ++lev)
            partial[lev + 1] = partial[lev] * card[lev][digits[lev]];
        w[flat] = partial[dim_ + 1];
        for (int lev = dim_; lev >= 0; --lev) {
            if (++digits[lev] < card[lev].size()) break;
            digits[lev] = 0;
        }
    }
    for (int q = 0; q < stride; ++q) {
        double acc = 0.0;
        for (size_t flat = 0; flat < nodes_total_; ++flat) acc += w[flat] * table[flat * stride + q];
        out[q] = acc;
    }
}

void CellField::eval_shifted(double s, std::span<const double> a, std::span<double> out) const {
    interp(u_, dim_, s, a, out);
    for (int i = 0; i < dim_; ++i)
        out[i] += prob_.alpha[i] * prob_.exp_factor(i, prob_.r, s, x_[i] - a[i]);
}

void CellField::eval(double s, std::span<double> out) const {
    const std::vector<double> zero(dim_, 0.0);
    eval_shifted(s, zero, out);
}

void CellField::eval_jacobian(double s, std::span<const double> a, std::span<double> out) const {
    if (!has_jacobian_)
        throw std::logic_error("CellField: jacobian was not requested at construction");
    interp(jac_, dim_ * dim_, s, a, out);
    for (int i = 0; i < dim_; ++i) {
        const double S = sigma_integral(prob_.cs->sigma[i], prob_.r, s);
        out[i * dim_ + i] +=
            (S / prob_.h) * prob_.alpha[i] * prob_.exp_factor(i, prob_.r, s, x_[i] - a[i]);
    }
}

void CellField::solve(const SolverConfig& cfg) {
    const int d = dim_;
    const size_t ns = s_axis_.nodes.size();
    const size_t per_row = nodes_total_ / ns;
    const auto& gl = quad::gauss_legendre(quad_nodes_);

    // cached node geometry
    std::vector<double> node_s(nodes_total_);
    std::vector<double> node_a(nodes_total_ * d);
    {
        std::vector<double> a;
        for (size_t flat = 0; flat < nodes_total_; ++flat) {
            node_coords(flat, node_s[flat], a);
            for (int j = 0; j < d; ++j) node_a[flat * d + j] = a[j];
        }
    }

    std::vector<double> u_new(nodes_total_ * d);
    std::vector<double> a_child(d), u_child(d), b_val(d), out_scratch(d);

    const bool zero_drift = prob_.cs->bound_M == 0.0;
    residuals_.clear();

    for (int sweep = 1; sweep <= cfg.picard_max; ++sweep) {
        double maxdiff = 0.0;
        for (size_t row = 0; row < ns; ++row) {
            const double s = s_axis_.nodes[row];
            const double mid = 0.5 * (prob_.r + s), half = 0.5 * (s - prob_.r);
            for (size_t k = 0; k < per_row; ++k) {
                const size_t flat = row * per_row + k;
                const double* a = node_a.data() + flat * d;
                for (int i = 0; i < d; ++i) {
                    double acc = 0.0;
                    if (half > 0.0 && !zero_drift) {
                        for (size_t c = 0; c < gl.nodes.size(); ++c) {
                            const double tau = mid + half * gl.nodes[c];
                            const double shift = sigma_integral(prob_.cs->sigma[i], tau, s);
                            for (int j = 0; j < d; ++j) a_child[j] = a[j];
                            a_child[i] += shift;
                            eval_shifted(tau, a_child, u_child);
                            prob_.cs->eval_drift(tau, u_child, b_val);
                            acc += gl.weights[c] * b_val[i] *
                                   prob_.exp_factor(i, tau, s, x_[i] - a[i]);
                        }
                        acc *= half;
                    }
                    u_new[flat * d + i] = acc;
                    maxdiff = std::max(maxdiff, std::abs(acc - u_[flat * d + i]));
                }
            }
        }
        u_.swap(u_new);
        residuals_.push_back(maxdiff);
        if (maxdiff <= cfg.picard_tol) return;
    }
    if (!residuals_.empty() && residuals_.back() > cfg.picard_tol)
        throw picard_error("CellField: fixed-point sweeps did not reach tolerance",
                           residuals_.back(), cfg.picard_max);
}

void CellField::solve_jacobian(const SolverConfig& cfg) {
    const int d = dim_;
    const size_t ns = s_axis_.nodes.size();
    const size_t per_row = nodes_total_ / ns;
    const auto& gl = quad::gauss_legendre(quad_nodes_);

    std::vector<double> node_s(nodes_total_);
    std::vector<double> node_a(nodes_total_ * d);
    {
        std::vector<double> a;
        for (size_t flat = 0; flat < nodes_total_; ++flat) {
            node_coords(flat, node_s[flat], a);
            for (int j = 0; j < d; ++j) node_a[flat * d + j] = a[j];
        }
    }

    jac_.assign(nodes_total_ * d * d, 0.0);
    std::vector<double> j_new(nodes_total_ * d * d);
    std::vector<double> a_child(d), u_child(d), b_val(d), db(d * d), j_child(d * d);

    has_jacobian_ = true; // eval_jacobian reads the in-progress table below
    const bool zero_drift = prob_.cs->bound_M == 0.0;

    for (int sweep = 1; sweep <= std::max(2, cfg.picard_max); ++sweep) {
        double maxdiff = 0.0;
        for (size_t row = 0; row < ns; ++row) {
            const double s = s_axis_.nodes[row];
            const double mid = 0.5 * (prob_.r + s), half = 0.5 * (s - prob_.r);
            for (size_t k = 0; k < per_row; ++k) {
                const size_t flat = row * per_row + k;
                const double* a = node_a.data() + flat * d;
                for (int i = 0; i < d; ++i) {
                    for (int l = 0; l < d; ++l) j_new[(flat * d + i) * d + l] = 0.0;
                    if (half > 0.0 && !zero_drift) {
                        for (size_t c = 0; c < gl.nodes.size(); ++c) {
                            const double tau = mid + half * gl.nodes[c];
                            const double shift = sigma_integral(prob_.cs->sigma[i], tau, s);
                            for (int j = 0; j < d; ++j) a_child[j] = a[j];
                            a_child[i] += shift;
                            eval_shifted(tau, a_child, u_child);
                            prob_.cs->eval_jacobian(tau, u_child, db);
                            eval_jacobian(tau, a_child, j_child);
                            prob_.cs->eval_drift(tau, u_child, b_val);
                            const double E = prob_.exp_factor(i, tau, s, x_[i] - a[i]);
                            const double wE = gl.weights[c] * half * E;
                            for (int l = 0; l < d; ++l) {
                                double sum = 0.0;
                                for (int m = 0; m < d; ++m)
                                    sum += db[i * d + m] * j_child[m * d + l];
                                j_new[(flat * d + i) * d + l] += wE * sum;
                            }
                            // d/dx_i of the exponential factor inside the integral
                            j_new[(flat * d + i) * d + i] += wE * (shift / prob_.h) * b_val[i];
                        }
                    }
                    for (int l = 0; l < d; ++l)
                        maxdiff = std::max(maxdiff, std::abs(j_new[(flat * d + i) * d + l] -
                                                             jac_[(flat * d + i) * d + l]));
                }
            }
        }
        jac_.swap(j_new);
        if (maxdiff <= cfg.picard_tol * (1.0 + 1.0 / prob_.h)) return;
    }
    // linear system with the same contraction factor as the value sweeps;
    // reaching here means picard_max was too small for the requested tol
    throw picard_error("CellField: jacobian sweeps did not reach tolerance",
                       residuals_.empty() ? 0.0 : residuals_.back(), cfg.picard_max);
}

// ---------------------------------------------------------------------------
// one-shot evaluators

std::vector<double> eval_u(const PdeProblem& p, double t, std::span<const double> x,
                           const SolverConfig& cfg) {
    if (t < p.r || t > p.t_end + 1e-12 * (p.t_end - p.r))
        throw std::domain_error("eval_u: time outside [r, t_end]");
    if (cfg.backend == "fan") return fan_value(p, t, x, cfg);
    if (cfg.backend != "collocation")
        throw std::invalid_argument("eval_u: unknown backend '" + cfg.backend + "'");
    if (t <= p.r) return p.alpha;
    PdeProblem clipped = p;
    clipped.t_end = t; // causality: u(t, .) does not depend on the interval beyond t
    const CellField field(clipped, x, cfg);
    std::vector<double> out(p.cs->dim);
    field.eval(t, out);
    return out;
}

std::vector<double> eval_u_grad(const PdeProblem& p, double t, std::span<const double> x,
                                const SolverConfig& cfg) {
    if (t < p.r || t > p.t_end + 1e-12 * (p.t_end - p.r))
        throw std::domain_error("eval_u_grad: time outside [r, t_end]");
    const int d = p.cs->dim;
    if (t <= p.r) {
        std::vector<double> out(static_cast<size_t>(d) * d, 0.0);
        return out; // constant initial data
    }
    PdeProblem clipped = p;
    clipped.t_end = t;
    CellField field(clipped, x, cfg, true);
    std::vector<double> out(static_cast<size_t>(d) * d);
    const std::vector<double> zero(d, 0.0);
    field.eval_jacobian(t, zero, out);
    return out;
}

namespace {

std::vector<double> fan_rec(const PdeProblem& p, double s, std::vector<double>& y, int level,
                            int max_level, const SolverConfig& cfg) {
    const int d = p.cs->dim;
    std::vector<double> val(d);
    for (int i = 0; i < d; ++i) val[i] = p.alpha[i] * p.exp_factor(i, p.r, s, y[i]);
    if (level >= max_level || s <= p.r || p.cs->bound_M == 0.0) return val;

    const auto& gl = quad::gauss_legendre(level_order(level, cfg.quad_nodes));
    const double mid = 0.5 * (p.r + s), half = 0.5 * (s - p.r);
    std::vector<double> b(d);
    for (size_t c = 0; c < gl.nodes.size(); ++c) {
        const double tau = mid + half * gl.nodes[c];
        for (int i = 0; i < d; ++i) {
            const double shift = sigma_integral(p.cs->sigma[i], tau, s);
            y[i] -= shift;
            const std::vector<double> child = fan_rec(p, tau, y, level + 1, max_level, cfg);
            y[i] += shift;
            p.cs->eval_drift(tau, child, b);
            val[i] += gl.weights[c] * half * b[i] * p.exp_factor(i, tau, s, y[i]);
        }
    }
    return val;
}

} // namespace

std::vector<double> fan_value(const PdeProblem& p, double t, std::span<const double> x,
                              const SolverConfig& cfg) {
    if (!(p.cs->bound_M < std::numeric_limits<double>::infinity()))
        throw std::invalid_argument("fan_value: drift must be bounded (truncation depth "
                                    "comes from the factorial tail bound)");
    if (t < p.r || t > p.t_end + 1e-12 * (p.t_end - p.r))
        throw std::domain_error("fan_value: time outside [r, t_end]");
    const int d = p.cs->dim;
    std::vector<double> y(x.begin(), x.end());
    if (t <= p.r) return p.alpha;

    // truncation depth from M (t-r) (L (t-r))^k / k! times a crude local
    // exponential-factor envelope
    const double delta = t - p.r;
    double log_env = 0.0;
    for (int i = 0; i < d; ++i) {
        const double sup = p.cs->sigma[i].sup_abs;
        log_env += std::max(0.0, (std::abs(x[i]) + sup * delta) * sup * delta / p.h);
    }
    const double env = std::exp(std::min(log_env, 60.0)) * std::exp(p.cs->lipschitz_L * delta);
    double tail = p.cs->bound_M * delta * env;
    int depth = 0;
    while (depth <= cfg.picard_max && tail > cfg.picard_tol) {
        ++depth;
        tail *= p.cs->lipschitz_L * delta / depth;
    }
    if (depth > cfg.picard_max)
        throw picard_error("fan_value: depth bound exceeded before reaching tolerance", tail,
                           cfg.picard_max);

    PdeProblem clipped = p;
    clipped.t_end = t;
    return fan_rec(clipped, t, y, 0, depth, cfg);
}

std::vector<double> mild_residual_u(const CellField& field, double t, int quad_nodes) {
    const PdeProblem& p = field.problem();
    const int d = field.dim();
    if (t < p.r || t > p.t_end + 1e-12 * (p.t_end - p.r))
        throw std::domain_error("mild_residual_u: time outside the cell");
    std::vector<double> lhs(d), rhs(d), a(d, 0.0), u_shift(d), b(d);
    field.eval(t, lhs);
    const auto& gl = quad::gauss_legendre(quad_nodes);
    const double mid = 0.5 * (p.r + t), half = 0.5 * (t - p.r);
    for (int i = 0; i < d; ++i)
        rhs[i] = p.alpha[i] * p.exp_factor(i, p.r, t, field.apex()[i]);
    if (half > 0.0) {
        for (size_t c = 0; c < gl.nodes.size(); ++c) {
            const double s = mid + half * gl.nodes[c];
            std::fill(a.begin(), a.end(), 0.0);
            for (int i = 0; i < d; ++i) {
                a[i] = sigma_integral(p.cs->sigma[i], s, t);
                field.eval_shifted(s, a, u_shift);
                a[i] = 0.0;
                p.cs->eval_drift(s, u_shift, b);
                rhs[i] += gl.weights[c] * half * b[i] *
                          p.exp_factor(i, s, t, field.apex()[i]);
            }
        }
    }
    for (int i = 0; i < d; ++i) rhs[i] -= lhs[i];
    return rhs;
}

double growth_bound_margin(const CellField& field, double t, int quad_nodes) {
    const PdeProblem& p = field.problem();
    const int d = field.dim();
    if (!(p.cs->bound_M < std::numeric_limits<double>::infinity()))
        throw std::invalid_argument("growth_bound_margin: drift must be bounded");
    std::vector<double> u(d);
    field.eval(t, u);
    double margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i) {
        double bound = std::abs(p.alpha[i]) * p.exp_factor(i, p.r, t, field.apex()[i]);
        if (p.cs->bound_M > 0.0 && t > p.r) {
            const auto integral = quad::integrate(
                [&](double s) { return p.exp_factor(i, s, t, field.apex()[i]); }, p.r, t,
                quad_nodes);
            bound += p.cs->bound_M * integral;
        }
        margin = std::min(margin, bound - std::abs(u[i]));
    }
    return margin;
}

} // namespace wzw
