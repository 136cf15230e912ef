#pragma once

#include "wzw/brownian.hpp"
#include "wzw/coefficients.hpp"
#include "wzw/partition.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace wzw {

// Weighted integral of the polygonal derivative: int_s^t sigma_i(r) dB^pi_i(r) dr.
// On each cell c met by [s, t] the polygonal derivative is Z_i(c) / width(c),
// so the value is sum_c S_i(seg_c) * Z_i(c) / width(c) with
// S_i(seg) = int_seg sigma_i. The returned variance is the exact Gaussian
// variance sum_c S_i(seg_c)^2 / width(c) used by the exponential compensator.
struct WeightedIntegral {
    double value = 0.0;
    double variance = 0.0;
};

WeightedIntegral polygonal_weighted_integral(const CoefficientSet& cs,
                                             const IncrementTable& increments, int comp,
                                             double s, double t);
// Convenience overload that derives the increment table from a path.
WeightedIntegral polygonal_weighted_integral(const CoefficientSet& cs, const BrownianPath& path,
                                             const Partition& pi, int comp, double s, double t);

// Which interval and sign an exponential carries. sign +1 is the approximant
// exponential, sign -1 its reciprocal-in-the-Wick-sense partner.
struct StochExpSpec {
    int comp = 0;
    double s = 0.0;
    double t = 0.0;
    int sign = +1;
};

// Polygonal stochastic exponential:
//   exp( sign * int_s^t sigma_i dB^pi - 1/2 * variance )
// Throws overflow_error if the exponent magnitude exceeds 700.
double stoch_exp_pi(const StochExpSpec& spec, const CoefficientSet& cs,
                    const IncrementTable& increments);

// Ito stochastic exponential on the path's fine grid:
//   exp( sign * sum sigma(tau_k) dB_k - 1/2 * sum sigma(tau_k)^2 dtau_k )
// Left-point sums for both the integral and the compensator, so the exponent
// is exactly Gaussian with mean -var/2 and the mean-one property is exact at
// any refinement.
double stoch_exp_ito(const StochExpSpec& spec, const CoefficientSet& cs,
                     const BrownianPath& path);

// Translation of one increment entry: returns a copy with Z_i(cell) shifted
// by -amount (the Gjessing shift direction; pass a negative amount to shift
// the other way).
IncrementTable translate(const IncrementTable& increments, int comp, int cell, double amount);

// A random variable seen as a function of the increment table, together with
// the set of (component, cell) entries it actually reads. The dependency set
// is what lets the Wick product with an exponential reduce to a plain product
// when the factors live on disjoint cells.
struct PathFunctional {
    std::function<double(const IncrementTable&)> eval;
    std::vector<std::pair<int, int>> deps; // (component, cell) pairs actually read

    bool depends_on(int comp, int cell) const;
};

PathFunctional constant_functional(double v);
// cs must outlive the returned functional (captured by reference).
PathFunctional stoch_exp_functional(const StochExpSpec& spec, const CoefficientSet& cs,
                                    const Partition& pi);

// Wick product X <> E of a functional with a polygonal exponential, in
// translation form: evaluate X on the table with each cell met by [s, t]
// shifted by sign * S_i(segment), then multiply by the exponential itself.
double wick_mul_exp(const PathFunctional& x, const StochExpSpec& exp_spec,
                    const CoefficientSet& cs, const IncrementTable& increments);

// The translated table wick_mul_exp uses (exposed for reuse by the mild-form
// integrands, which need X evaluated under the same shift).
IncrementTable wick_shift_table(const StochExpSpec& exp_spec, const CoefficientSet& cs,
                                const IncrementTable& increments);

} // namespace wzw
