#include "wzw/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace wzw::quad {

namespace {

// Legendre P_n and derivative via the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    return {p1, dp};
}

Rule make_gauss_legendre(int n) {
    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev initial guess, then Newton.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre(n, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const auto [p, dp] = legendre(n, x);
        (void)p;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.weights[i] = w;
        r.nodes[n - 1 - i] = x;
        r.weights[n - 1 - i] = w;
    }
    if (n == 1) {
        r.nodes[0] = 0.0;
        r.weights[0] = 2.0;
    }
    return r;
}

// Physicists' Hermite H_n and derivative (weight e^{-x^2}).
std::pair<double, double> hermite_h(int n, double x) {
    double h0 = 1.0, h1 = 2.0 * x;
    if (n == 0) return {1.0, 0.0};
    for (int k = 2; k <= n; ++k) {
        const double h2 = 2.0 * x * h1 - 2.0 * (k - 1) * h0;
        h0 = h1;
        h1 = h2;
    }
    return {h1, 2.0 * n * h0};
}

Rule make_gauss_hermite(int n) {
    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    // Find the roots of physicists' H_n, marching inward from the largest
    // with the standard asymptotic guesses, then rescale to the e^{-x^2/2}
    // weight by sqrt(2). Working in the H_n convention keeps the guesses and
    // the Newton target consistent.
    std::vector<double> root((n + 1) / 2, 0.0);
    double x = 0.0;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        if (i == 0)
            x = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1)
            x -= 1.14 * std::pow(static_cast<double>(n), 0.426) / x;
        else if (i == 2)
            x = 1.86 * x - 0.86 * root[0];
        else if (i == 3)
            x = 1.91 * x - 0.91 * root[1];
        else
            x = 2.0 * x - root[i - 2];
        for (int it = 0; it < 200; ++it) {
            const auto [h, dh] = hermite_h(n, x);
            const double dx = h / dh;
            x -= dx;
            if (std::abs(dx) < 1e-14 * (1.0 + std::abs(x))) break;
        }
        root[i] = x;
        const auto [h, dh] = hermite_h(n, x);
        (void)h;
        // Unnormalized weight 1/H'_n(x)^2; the common factor drops out when
        // the weights are scaled to sum to one below.
        const double w = 1.0 / (dh * dh);
        r.nodes[n - 1 - i] = std::sqrt(2.0) * x;
        r.weights[n - 1 - i] = w;
        r.nodes[i] = -std::sqrt(2.0) * x;
        r.weights[i] = w;
    }
    if (n % 2 == 1) {
        r.nodes[n / 2] = 0.0;
        const auto [h, dh] = hermite_h(n, 0.0);
        (void)h;
        r.weights[n / 2] = 1.0 / (dh * dh);
    }
    double total = 0.0;
    for (double w : r.weights) total += w;
    for (double& w : r.weights) w /= total;
    return r;
}

std::mutex cache_mutex;

} // namespace

const Rule& gauss_legendre(int n) {
    if (n < 1 || n > 64) throw std::invalid_argument("gauss_legendre: order out of range");
    static std::map<int, Rule> cache;
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
    return it->second;
}

const Rule& gauss_hermite(int n) {
    if (n < 1 || n > 512) throw std::invalid_argument("gauss_hermite: order out of range");
    static std::map<int, Rule> cache;
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gauss_hermite(n)).first;
    return it->second;
}

double integrate(const std::function<double(double)>& f, double a, double b, int n) {
    const Rule& r = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (size_t i = 0; i < r.nodes.size(); ++i) acc += r.weights[i] * f(mid + half * r.nodes[i]);
    return acc * half;
}

std::vector<double> chebyshev_lobatto(double a, double b, int n) {
    if (n < 1) throw std::invalid_argument("chebyshev_lobatto: need n >= 1");
    std::vector<double> pts(n);
    if (n == 1) {
        pts[0] = 0.5 * (a + b);
        return pts;
    }
    for (int j = 0; j < n; ++j) {
        const double c = std::cos(M_PI * j / (n - 1)); // 1 .. -1
        pts[n - 1 - j] = 0.5 * (a + b) + 0.5 * (b - a) * c;
    }
    pts.front() = a;
    pts.back() = b;
    return pts;
}

std::vector<double> barycentric_weights(const std::vector<double>& nodes) {
    const size_t n = nodes.size();
    std::vector<double> w(n, 1.0);
    for (size_t j = 0; j < n; ++j)
        for (size_t k = 0; k < n; ++k)
            if (k != j) w[j] /= (nodes[j] - nodes[k]);
    return w;
}

void barycentric_cardinal(const std::vector<double>& nodes, const std::vector<double>& w,
                          double x, std::vector<double>& out) {
    const size_t n = nodes.size();
    out.assign(n, 0.0);
    if (n == 1) {
        out[0] = 1.0;
        return;
    }
    double denom = 0.0;
    for (size_t j = 0; j < n; ++j) {
        const double d = x - nodes[j];
        if (std::abs(d) < 1e-300) {
            out.assign(n, 0.0);
            out[j] = 1.0;
            return;
        }
        out[j] = w[j] / d;
        denom += out[j];
    }
    for (size_t j = 0; j < n; ++j) out[j] /= denom;
}

} // namespace wzw::quad
