#pragma once

#include "wzw/partition.hpp"

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace wzw {

// One diffusion coefficient sigma_i(t). Closed-form antiderivatives are kept
// when available so the hot paths never pay for quadrature.
struct SigmaFn {
    std::function<double(double)> value;
    // integral(s, t) = int_s^t sigma(r) dr; empty means "use quadrature".
    std::function<double(double, double)> integral;
    bool is_constant = false;
    double constant = 0.0;
    double sup_abs = 0.0; // bound used by growth estimates

    static SigmaFn constant_fn(double v);
    static SigmaFn linear_fn(double intercept, double slope, double horizon);
};

// int_s^t sigma_i(r) dr, exact when the family has a closed form, otherwise
// Gauss-Legendre. Throws std::domain_error if s > t.
double sigma_integral(const SigmaFn& sigma, double s, double t, int quad_nodes = 16);

// Diagonal-noise quasilinear system: dX_i = b_i(t, X) dt + sigma_i(t) X_i dB_i,
// X(0) = c. The drift must be bounded and L1-Lipschitz except for families
// explicitly flagged oracle_only (used for closed-form checks only).
struct CoefficientSet {
    int dim = 0;
    std::string name;
    std::function<void(double, std::span<const double>, std::span<double>)> drift;
    // Row-major d x d Jacobian d b_i / d x_j; empty means finite differences.
    std::function<void(double, std::span<const double>, std::span<double>)> drift_jacobian;
    double bound_M = 0.0;    // sup_i sup |b_i|
    double lipschitz_L = 0.0; // |b(t,x)-b(t,y)|_1 <= L |x-y|_1
    bool oracle_only = false;
    std::vector<SigmaFn> sigma; // size dim
    std::vector<double> init;   // c, size dim

    double sigma_sup() const;
    void eval_drift(double t, std::span<const double> x, std::span<double> out) const;
    void eval_jacobian(double t, std::span<const double> x, std::span<double> out) const;
};

// Families selectable from config. Parameters come as name -> list-of-values.
using ParamMap = std::map<std::string, std::vector<double>>;

// drift "zero": b = 0.
CoefficientSet make_zero_drift(int dim, std::vector<double> c, std::vector<SigmaFn> sigma);
// drift "tanh": b_i(t, x) = beta_i * tanh(x_i).
CoefficientSet make_tanh_drift(int dim, std::vector<double> beta, std::vector<double> c,
                               std::vector<SigmaFn> sigma);
// drift "tanh_coupled": b_i(t, x) = tanh(sum_j A_ij x_j), A row-major.
CoefficientSet make_coupled_tanh_drift(int dim, std::vector<double> a_rowmajor,
                                       std::vector<double> c, std::vector<SigmaFn> sigma);
// drift "linear": b_i(t, x) = beta_i * x_i. Unbounded, closed-form oracle use
// only; experiment drivers must refuse it.
CoefficientSet make_linear_drift(int dim, std::vector<double> beta, std::vector<double> c,
                                 std::vector<SigmaFn> sigma);

// Builds a coefficient set from family names and a parameter map; this is the
// config-file entry point. Throws std::invalid_argument for unknown names or
// inconsistent parameter sizes.
CoefficientSet make_coefficients(const std::string& drift_family,
                                 const std::string& sigma_family, int dim, double horizon,
                                 const ParamMap& params);

// Per-cell sigma integrals for a fixed partition, so repeated segment queries
// cost one table lookup plus a partial-cell term.
class SigmaIntegralCache {
public:
    SigmaIntegralCache(const CoefficientSet& cs, const Partition& pi);
    // int over [t_c, t_{c+1}] for component i
    double cell(int comp, int c) const { return cells_[comp * n_ + c]; }
    // int over [pi.node(a), pi.node(b)] via prefix sums
    double between_nodes(int comp, int a, int b) const {
        return prefix_[comp * (n_ + 1) + b] - prefix_[comp * (n_ + 1) + a];
    }

private:
    int n_;
    std::vector<double> cells_;
    std::vector<double> prefix_;
};

} // namespace wzw
