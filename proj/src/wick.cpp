#include "wzw/wick.hpp"

#include "wzw/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wzw {

namespace {

struct Segment {
    int cell;
    double lo, hi;
};

// Cells met by [s, t] with positive-length intersection.
std::vector<Segment> segments_met(const Partition& pi, double s, double t) {
    if (t < s) throw std::domain_error("segments_met: need s <= t");
    std::vector<Segment> out;
    if (t == s) return out;
    const double tol = 1e-12 * std::max(1.0, pi.horizon());
    const int c0 = pi.cell_of(s), c1 = pi.cell_of(t);
    for (int c = c0; c <= c1; ++c) {
        const double lo = std::max(s, pi.node(c));
        const double hi = std::min(t, pi.node(c + 1));
        if (hi - lo > tol) out.push_back({c, lo, hi});
    }
    return out;
}

double checked_exp(double exponent, const char* what) {
    if (std::abs(exponent) > 700.0)
        throw overflow_error(std::string(what) + ": exponent magnitude exceeds 700");
    return std::exp(exponent);
}

} // namespace

WeightedIntegral polygonal_weighted_integral(const CoefficientSet& cs,
                                             const IncrementTable& increments, int comp,
                                             double s, double t) {
    if (comp < 0 || comp >= cs.dim)
        throw std::invalid_argument("polygonal_weighted_integral: component out of range");
    WeightedIntegral w;
    for (const auto& seg : segments_met(increments.partition, s, t)) {
        const double S = sigma_integral(cs.sigma[comp], seg.lo, seg.hi);
        const double width = increments.partition.width(seg.cell);
        w.value += S * increments(comp, seg.cell) / width;
        w.variance += S * S / width;
    }
    return w;
}

WeightedIntegral polygonal_weighted_integral(const CoefficientSet& cs, const BrownianPath& path,
                                             const Partition& pi, int comp, double s, double t) {
    return polygonal_weighted_integral(cs, partition_increments(path, pi), comp, s, t);
}

double stoch_exp_pi(const StochExpSpec& spec, const CoefficientSet& cs,
                    const IncrementTable& increments) {
    if (spec.sign != 1 && spec.sign != -1)
        throw std::invalid_argument("stoch_exp_pi: sign must be +1 or -1");
    const auto w = polygonal_weighted_integral(cs, increments, spec.comp, spec.s, spec.t);
    return checked_exp(spec.sign * w.value - 0.5 * w.variance, "stoch_exp_pi");
}

double stoch_exp_ito(const StochExpSpec& spec, const CoefficientSet& cs,
                     const BrownianPath& path) {
    if (spec.sign != 1 && spec.sign != -1)
        throw std::invalid_argument("stoch_exp_ito: sign must be +1 or -1");
    if (spec.comp < 0 || spec.comp >= cs.dim)
        throw std::invalid_argument("stoch_exp_ito: component out of range");
    if (spec.t < spec.s) throw std::domain_error("stoch_exp_ito: need s <= t");
    const size_t a = path.index_of(spec.s), b = path.index_of(spec.t);
    const SigmaFn& sig = cs.sigma[spec.comp];
    double ito = 0.0, var = 0.0;
    for (size_t k = a; k < b; ++k) {
        const double sv = sig.value(path.times[k]);
        const double db = path.value(spec.comp, k + 1) - path.value(spec.comp, k);
        ito += sv * db;
        var += sv * sv * (path.times[k + 1] - path.times[k]);
    }
    return checked_exp(spec.sign * ito - 0.5 * var, "stoch_exp_ito");
}

IncrementTable translate(const IncrementTable& increments, int comp, int cell, double amount) {
    if (comp < 0 || comp >= increments.dim)
        throw std::invalid_argument("translate: component out of range");
    if (cell < 0 || cell >= increments.partition.cells())
        throw std::invalid_argument("translate: cell out of range");
    IncrementTable out = increments;
    out.at(comp, cell) -= amount;
    return out;
}

bool PathFunctional::depends_on(int comp, int cell) const {
    return std::find(deps.begin(), deps.end(), std::make_pair(comp, cell)) != deps.end();
}

PathFunctional constant_functional(double v) {
    PathFunctional f;
    f.eval = [v](const IncrementTable&) { return v; };
    return f;
}

PathFunctional stoch_exp_functional(const StochExpSpec& spec, const CoefficientSet& cs,
                                    const Partition& pi) {
    PathFunctional f;
    f.eval = [spec, &cs](const IncrementTable& tab) { return stoch_exp_pi(spec, cs, tab); };
    for (const auto& seg : segments_met(pi, spec.s, spec.t))
        f.deps.emplace_back(spec.comp, seg.cell);
    return f;
}

IncrementTable wick_shift_table(const StochExpSpec& exp_spec, const CoefficientSet& cs,
                                const IncrementTable& increments) {
    IncrementTable out = increments;
    for (const auto& seg : segments_met(increments.partition, exp_spec.s, exp_spec.t)) {
        const double S = sigma_integral(cs.sigma[exp_spec.comp], seg.lo, seg.hi);
        out.at(exp_spec.comp, seg.cell) -= exp_spec.sign * S;
    }
    return out;
}

double wick_mul_exp(const PathFunctional& x, const StochExpSpec& exp_spec,
                    const CoefficientSet& cs, const IncrementTable& increments) {
    const IncrementTable shifted = wick_shift_table(exp_spec, cs, increments);
    return x.eval(shifted) * stoch_exp_pi(exp_spec, cs, increments);
}

} // namespace wzw
