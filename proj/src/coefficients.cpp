#include "wzw/coefficients.hpp"

#include "wzw/philox.hpp"
#include "wzw/quadrature.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace wzw {

SigmaFn SigmaFn::constant_fn(double v) {
    SigmaFn s;
    s.value = [v](double) { return v; };
    s.integral = [v](double a, double b) { return v * (b - a); };
    s.is_constant = true;
    s.constant = v;
    s.sup_abs = std::abs(v);
    return s;
}

SigmaFn SigmaFn::linear_fn(double intercept, double slope, double horizon) {
    SigmaFn s;
    s.value = [intercept, slope](double r) { return intercept + slope * r; };
    s.integral = [intercept, slope](double a, double b) {
        return intercept * (b - a) + 0.5 * slope * (b * b - a * a);
    };
    s.is_constant = slope == 0.0;
    s.constant = intercept;
    s.sup_abs = std::max(std::abs(intercept), std::abs(intercept + slope * horizon));
    return s;
}

double sigma_integral(const SigmaFn& sigma, double s, double t, int quad_nodes) {
    if (s > t) throw std::domain_error("sigma_integral: need s <= t");
    if (s == t) return 0.0;
    if (sigma.integral) return sigma.integral(s, t);
    return quad::integrate(sigma.value, s, t, quad_nodes);
}

double CoefficientSet::sigma_sup() const {
    double m = 0.0;
    for (const auto& s : sigma) m = std::max(m, s.sup_abs);
    return m;
}

void CoefficientSet::eval_drift(double t, std::span<const double> x, std::span<double> out) const {
    drift(t, x, out);
}

void CoefficientSet::eval_jacobian(double t, std::span<const double> x,
                                   std::span<double> out) const {
    if (drift_jacobian) {
        drift_jacobian(t, x, out);
        return;
    }
    // central differences, step scaled per coordinate
    std::vector<double> xp(x.begin(), x.end()), bp(dim), bm(dim);
    for (int j = 0; j < dim; ++j) {
        const double step = 6e-6 * (1.0 + std::abs(x[j]));
        xp[j] = x[j] + step;
        drift(t, xp, bp);
        xp[j] = x[j] - step;
        drift(t, xp, bm);
        xp[j] = x[j];
        for (int i = 0; i < dim; ++i) out[i * dim + j] = (bp[i] - bm[i]) / (2.0 * step);
    }
}

namespace {

void check_sizes(int dim, const std::vector<double>& c, const std::vector<SigmaFn>& sigma) {
    if (dim < 1) throw std::invalid_argument("CoefficientSet: dim must be >= 1");
    if (static_cast<int>(c.size()) != dim)
        throw std::invalid_argument("CoefficientSet: init size != dim");
    if (static_cast<int>(sigma.size()) != dim)
        throw std::invalid_argument("CoefficientSet: sigma count != dim");
}

// Spot-checks the declared bound and Lipschitz constants on a fixed probe
// set. Cheap insurance against a family registered with the wrong constants.
void spot_check(const CoefficientSet& cs) {
    if (cs.oracle_only) return;
    const int d = cs.dim;
    std::vector<double> x(d), y(d), bx(d), by(d);
    for (int probe = 0; probe < 64; ++probe) {
        for (int j = 0; j < d; ++j) {
            auto u = philox::uniforms(0x5eedcafe, probe, j, 0);
            x[j] = 6.0 * u[0] - 3.0;
            y[j] = 6.0 * u[1] - 3.0;
        }
        const double t = 0.37 * probe / 64.0;
        cs.drift(t, x, bx);
        cs.drift(t, y, by);
        double dist = 0.0, bdist = 0.0;
        for (int j = 0; j < d; ++j) {
            if (std::abs(bx[j]) > cs.bound_M * (1.0 + 1e-12))
                throw std::invalid_argument("CoefficientSet: drift exceeds declared bound");
            dist += std::abs(x[j] - y[j]);
            bdist += std::abs(bx[j] - by[j]);
        }
        if (bdist > cs.lipschitz_L * dist * (1.0 + 1e-9))
            throw std::invalid_argument("CoefficientSet: drift exceeds declared Lipschitz bound");
    }
}

} // namespace

CoefficientSet make_zero_drift(int dim, std::vector<double> c, std::vector<SigmaFn> sigma) {
    check_sizes(dim, c, sigma);
    CoefficientSet cs;
    cs.dim = dim;
    cs.name = "zero";
    cs.drift = [](double, std::span<const double>, std::span<double> out) {
        for (auto& v : out) v = 0.0;
    };
    cs.drift_jacobian = [](double, std::span<const double>, std::span<double> out) {
        for (auto& v : out) v = 0.0;
    };
    cs.bound_M = 0.0;
    cs.lipschitz_L = 0.0;
    cs.sigma = std::move(sigma);
    cs.init = std::move(c);
    spot_check(cs);
    return cs;
}

CoefficientSet make_tanh_drift(int dim, std::vector<double> beta, std::vector<double> c,
                               std::vector<SigmaFn> sigma) {
    check_sizes(dim, c, sigma);
    if (static_cast<int>(beta.size()) != dim)
        throw std::invalid_argument("make_tanh_drift: beta size != dim");
    CoefficientSet cs;
    cs.dim = dim;
    cs.name = "tanh";
    cs.drift = [beta](double, std::span<const double> x, std::span<double> out) {
        for (size_t i = 0; i < beta.size(); ++i) out[i] = beta[i] * std::tanh(x[i]);
    };
    cs.drift_jacobian = [beta, dim](double, std::span<const double> x, std::span<double> out) {
        for (auto& v : out) v = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double th = std::tanh(x[i]);
            out[i * dim + i] = beta[i] * (1.0 - th * th);
        }
    };
    double bmax = 0.0;
    for (double b : beta) bmax = std::max(bmax, std::abs(b));
    cs.bound_M = bmax;
    cs.lipschitz_L = bmax;
    cs.sigma = std::move(sigma);
    cs.init = std::move(c);
    spot_check(cs);
    return cs;
}

CoefficientSet make_coupled_tanh_drift(int dim, std::vector<double> a_rowmajor,
                                       std::vector<double> c, std::vector<SigmaFn> sigma) {
    check_sizes(dim, c, sigma);
    if (static_cast<int>(a_rowmajor.size()) != dim * dim)
        throw std::invalid_argument("make_coupled_tanh_drift: coupling matrix size != dim^2");
    CoefficientSet cs;
    cs.dim = dim;
    cs.name = "tanh_coupled";
    const auto A = a_rowmajor;
    cs.drift = [A, dim](double, std::span<const double> x, std::span<double> out) {
        for (int i = 0; i < dim; ++i) {
            double s = 0.0;
            for (int j = 0; j < dim; ++j) s += A[i * dim + j] * x[j];
            out[i] = std::tanh(s);
        }
    };
    cs.drift_jacobian = [A, dim](double, std::span<const double> x, std::span<double> out) {
        for (int i = 0; i < dim; ++i) {
            double s = 0.0;
            for (int j = 0; j < dim; ++j) s += A[i * dim + j] * x[j];
            const double sech2 = 1.0 - std::tanh(s) * std::tanh(s);
            for (int j = 0; j < dim; ++j) out[i * dim + j] = sech2 * A[i * dim + j];
        }
    };
    cs.bound_M = 1.0;
    // L1 operator norm: max column abs sum
    double L = 0.0;
    for (int j = 0; j < dim; ++j) {
        double col = 0.0;
        for (int i = 0; i < dim; ++i) col += std::abs(A[i * dim + j]);
        L = std::max(L, col);
    }
    cs.lipschitz_L = L;
    cs.sigma = std::move(sigma);
    cs.init = std::move(c);
    spot_check(cs);
    return cs;
}

CoefficientSet make_linear_drift(int dim, std::vector<double> beta, std::vector<double> c,
                                 std::vector<SigmaFn> sigma) {
    check_sizes(dim, c, sigma);
    if (static_cast<int>(beta.size()) != dim)
        throw std::invalid_argument("make_linear_drift: beta size != dim");
    CoefficientSet cs;
    cs.dim = dim;
    cs.name = "linear";
    cs.drift = [beta](double, std::span<const double> x, std::span<double> out) {
        for (size_t i = 0; i < beta.size(); ++i) out[i] = beta[i] * x[i];
    };
    cs.drift_jacobian = [beta, dim](double, std::span<const double>, std::span<double> out) {
        for (auto& v : out) v = 0.0;
        for (int i = 0; i < dim; ++i) out[i * dim + i] = beta[i];
    };
    double bmax = 0.0;
    for (double b : beta) bmax = std::max(bmax, std::abs(b));
    cs.bound_M = std::numeric_limits<double>::infinity(); // unbounded
    cs.lipschitz_L = bmax;
    cs.oracle_only = true;
    cs.sigma = std::move(sigma);
    cs.init = std::move(c);
    return cs;
}

CoefficientSet make_coefficients(const std::string& drift_family,
                                 const std::string& sigma_family, int dim, double horizon,
                                 const ParamMap& params) {
    auto list = [&](const std::string& key, size_t want, double fallback,
                    bool required = false) -> std::vector<double> {
        auto it = params.find(key);
        if (it == params.end()) {
            if (required) throw std::invalid_argument("make_coefficients: missing parameter " + key);
            return std::vector<double>(want, fallback);
        }
        std::vector<double> v = it->second;
        if (v.size() == 1 && want > 1) v.assign(want, v[0]); // broadcast scalars
        if (v.size() != want)
            throw std::invalid_argument("make_coefficients: parameter " + key +
                                        " has wrong length");
        return v;
    };

    std::vector<SigmaFn> sigma;
    if (sigma_family == "const") {
        for (double v : list("sigma", dim, 1.0)) sigma.push_back(SigmaFn::constant_fn(v));
    } else if (sigma_family == "linear") {
        auto p = list("sigma", dim, 1.0);
        auto q = list("sigma_slope", dim, 0.0);
        for (int i = 0; i < dim; ++i) sigma.push_back(SigmaFn::linear_fn(p[i], q[i], horizon));
    } else {
        throw std::invalid_argument("make_coefficients: unknown sigma family '" + sigma_family +
                                    "'");
    }

    auto c = list("c", dim, 1.0);
    if (drift_family == "zero") return make_zero_drift(dim, c, std::move(sigma));
    if (drift_family == "tanh")
        return make_tanh_drift(dim, list("beta", dim, 0.5), c, std::move(sigma));
    if (drift_family == "tanh_coupled")
        return make_coupled_tanh_drift(dim, list("A", static_cast<size_t>(dim) * dim, 0.0, true),
                                       c, std::move(sigma));
    if (drift_family == "linear")
        return make_linear_drift(dim, list("beta", dim, 0.5), c, std::move(sigma));
    throw std::invalid_argument("make_coefficients: unknown drift family '" + drift_family + "'");
}

SigmaIntegralCache::SigmaIntegralCache(const CoefficientSet& cs, const Partition& pi)
    : n_(pi.cells()) {
    cells_.resize(static_cast<size_t>(cs.dim) * n_);
    prefix_.assign(static_cast<size_t>(cs.dim) * (n_ + 1), 0.0);
    for (int i = 0; i < cs.dim; ++i)
        for (int c = 0; c < n_; ++c) {
            const double v = sigma_integral(cs.sigma[i], pi.node(c), pi.node(c + 1));
            cells_[i * n_ + c] = v;
            prefix_[i * (n_ + 1) + c + 1] = prefix_[i * (n_ + 1) + c] + v;
        }
}

} // namespace wzw
