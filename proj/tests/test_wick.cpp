#include "doctest.h"

#include "wzw/errors.hpp"
#include "wzw/wick.hpp"

#include <cmath>

using namespace wzw;

namespace {

struct Fixture {
    CoefficientSet cs;
    BrownianPath path;
    Partition pi;
    IncrementTable z;

    Fixture()
        : cs(make_zero_drift(2, {1.0, 1.0},
                             {SigmaFn::constant_fn(1.0), SigmaFn::constant_fn(0.6)})),
          path(sample_brownian(2, 1.0, 64, 99u, 0u)),
          pi(Partition::uniform(1.0, 4)),
          z(partition_increments(path, pi)) {}
};

} // namespace

TEST_CASE("weighted integral over one full cell returns the raw increment") {
    Fixture f;
    auto wi = polygonal_weighted_integral(f.cs, f.z, 0, 0.25, 0.5);
    CHECK(wi.value == doctest::Approx(f.z(0, 1)).epsilon(1e-14));
    CHECK(wi.variance == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("weighted integral weights a partial cell by covered length") {
    Fixture f;
    auto wi = polygonal_weighted_integral(f.cs, f.z, 0, 0.3, 0.4);
    CHECK(wi.value == doctest::Approx(0.1 * f.z(0, 1) / 0.25).epsilon(1e-13));
    CHECK(wi.variance == doctest::Approx(0.01 / 0.25).epsilon(1e-13));
}

TEST_CASE("weighted integral spanning several cells adds segment terms") {
    Fixture f;
    auto wi = polygonal_weighted_integral(f.cs, f.z, 0, 0.2, 0.6);
    const double expect =
        0.05 * f.z(0, 0) / 0.25 + f.z(0, 1) + 0.1 * f.z(0, 2) / 0.25;
    CHECK(wi.value == doctest::Approx(expect).epsilon(1e-13));
    CHECK(wi.variance ==
          doctest::Approx((0.05 * 0.05 + 0.25 * 0.25 + 0.1 * 0.1) / 0.25).epsilon(1e-13));
}

TEST_CASE("constant sigma reduces the weighted integral to a polygonal difference") {
    Fixture f;
    const double s = 0.13, t = 0.86;
    auto wi = polygonal_weighted_integral(f.cs, f.path, f.pi, 1, s, t);
    const double diff = polygonal_eval(f.path, f.pi, 1, t) - polygonal_eval(f.path, f.pi, 1, s);
    CHECK(wi.value == doctest::Approx(0.6 * diff).epsilon(1e-12));
}

TEST_CASE("polygonal exponential matches its exponent by construction") {
    Fixture f;
    StochExpSpec spec{0, 0.0, 1.0, +1};
    auto wi = polygonal_weighted_integral(f.cs, f.z, 0, 0.0, 1.0);
    CHECK(stoch_exp_pi(spec, f.cs, f.z) ==
          doctest::Approx(std::exp(wi.value - 0.5 * wi.variance)).epsilon(1e-14));
    // unit sigma over the whole horizon: exponent is B(1) - 1/2
    CHECK(stoch_exp_pi(spec, f.cs, f.z) ==
          doctest::Approx(std::exp(f.path.value(0, 64) - 0.5)).epsilon(1e-12));
    spec.sign = -1;
    CHECK(stoch_exp_pi(spec, f.cs, f.z) ==
          doctest::Approx(std::exp(-wi.value - 0.5 * wi.variance)).epsilon(1e-14));
}

TEST_CASE("exponential factorizes as a plain product across a partition node") {
    Fixture f;
    StochExpSpec whole{0, 0.0, 0.75, +1};
    StochExpSpec left{0, 0.0, 0.5, +1};
    StochExpSpec right{0, 0.5, 0.75, +1};
    CHECK(stoch_exp_pi(left, f.cs, f.z) * stoch_exp_pi(right, f.cs, f.z) ==
          doctest::Approx(stoch_exp_pi(whole, f.cs, f.z)).epsilon(1e-13));
}

TEST_CASE("wick product law holds across an arbitrary split point") {
    Fixture f;
    const double s = 0.1, u = 0.37, t = 0.83;
    for (int comp : {0, 1}) {
        StochExpSpec su{comp, s, u, +1};
        StochExpSpec ut{comp, u, t, +1};
        StochExpSpec st{comp, s, t, +1};
        PathFunctional first = stoch_exp_functional(su, f.cs, f.pi);
        const double wick = wick_mul_exp(first, ut, f.cs, f.z);
        CHECK(wick == doctest::Approx(stoch_exp_pi(st, f.cs, f.z)).epsilon(1e-12));
        // the plain product differs because the factors share cell coverage
        const double plain = stoch_exp_pi(su, f.cs, f.z) * stoch_exp_pi(ut, f.cs, f.z);
        CHECK(std::abs(plain - stoch_exp_pi(st, f.cs, f.z)) > 1e-8);
    }
}

TEST_CASE("wick product with the opposite-sign exponential is one") {
    Fixture f;
    for (int comp : {0, 1}) {
        StochExpSpec fwd{comp, 0.1, 0.9, +1};
        StochExpSpec bwd{comp, 0.1, 0.9, -1};
        PathFunctional inv = stoch_exp_functional(bwd, f.cs, f.pi);
        CHECK(wick_mul_exp(inv, fwd, f.cs, f.z) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("constant functionals pass through the wick product") {
    Fixture f;
    PathFunctional c = constant_functional(2.5);
    CHECK(c.eval(f.z) == 2.5);
    CHECK(c.deps.empty());
    CHECK(!c.depends_on(0, 1));
    StochExpSpec spec{0, 0.2, 0.7, +1};
    CHECK(wick_mul_exp(c, spec, f.cs, f.z) ==
          doctest::Approx(2.5 * stoch_exp_pi(spec, f.cs, f.z)).epsilon(1e-14));
}

TEST_CASE("exponential functionals report exactly the cells they read") {
    Fixture f;
    StochExpSpec spec{1, 0.3, 0.6, +1};
    PathFunctional e = stoch_exp_functional(spec, f.cs, f.pi);
    CHECK(e.depends_on(1, 1));
    CHECK(e.depends_on(1, 2));
    CHECK(!e.depends_on(1, 0));
    CHECK(!e.depends_on(1, 3));
    CHECK(!e.depends_on(0, 1));
    CHECK(e.eval(f.z) == doctest::Approx(stoch_exp_pi(spec, f.cs, f.z)).epsilon(1e-14));
}

TEST_CASE("translate shifts a single table entry and nothing else") {
    Fixture f;
    IncrementTable shifted = translate(f.z, 1, 2, 0.4);
    CHECK(shifted(1, 2) == doctest::Approx(f.z(1, 2) - 0.4).epsilon(1e-15));
    CHECK(shifted(1, 1) == f.z(1, 1));
    CHECK(shifted(0, 2) == f.z(0, 2));
    CHECK(f.z(1, 2) == doctest::Approx(partition_increments(f.path, f.pi)(1, 2)));
}

TEST_CASE("wick product equals the shifted evaluation times the exponential") {
    Fixture f;
    StochExpSpec spec{0, 0.15, 0.66, +1};
    StochExpSpec probe{0, 0.1, 0.8, +1};
    PathFunctional x = stoch_exp_functional(probe, f.cs, f.pi);
    IncrementTable shifted = wick_shift_table(spec, f.cs, f.z);
    CHECK(wick_mul_exp(x, spec, f.cs, f.z) ==
          doctest::Approx(x.eval(shifted) * stoch_exp_pi(spec, f.cs, f.z)).epsilon(1e-13));
}

TEST_CASE("shift tables compose like the underlying translation group") {
    Fixture f;
    const double s = 0.1, u = 0.42, t = 0.9;
    StochExpSpec su{0, s, u, +1};
    StochExpSpec ut{0, u, t, +1};
    StochExpSpec st{0, s, t, +1};
    IncrementTable two_step = wick_shift_table(ut, f.cs, wick_shift_table(su, f.cs, f.z));
    IncrementTable one_step = wick_shift_table(st, f.cs, f.z);
    for (int c = 0; c < 4; ++c)
        CHECK(two_step(0, c) == doctest::Approx(one_step(0, c)).epsilon(1e-13));
}

TEST_CASE("exponentials overflow loudly instead of returning inf") {
    Fixture f;
    IncrementTable huge = f.z;
    huge.at(0, 0) = 1e6;
    StochExpSpec spec{0, 0.0, 1.0, +1};
    CHECK_THROWS_AS((void)stoch_exp_pi(spec, f.cs, huge), overflow_error);
}

TEST_CASE("both exponentials have unit mean over many paths") {
    auto cs = make_zero_drift(1, {1.0}, {SigmaFn::constant_fn(0.6)});
    Partition pi = Partition::uniform(1.0, 4);
    const size_t n = 2000;
    double sum_pi = 0.0, sumsq_pi = 0.0, sum_ito = 0.0, sumsq_ito = 0.0;
    for (size_t p = 0; p < n; ++p) {
        BrownianPath w = sample_brownian(1, 1.0, 64, 2718u, p);
        IncrementTable z = partition_increments(w, pi);
        StochExpSpec spec{0, 0.0, 1.0, +1};
        const double e_pi = stoch_exp_pi(spec, cs, z);
        const double e_ito = stoch_exp_ito(spec, cs, w);
        sum_pi += e_pi;
        sumsq_pi += e_pi * e_pi;
        sum_ito += e_ito;
        sumsq_ito += e_ito * e_ito;
    }
    auto zscore = [n](double sum, double sumsq) {
        const double mean = sum / n;
        const double var = (sumsq - sum * sum / n) / (n - 1);
        return (mean - 1.0) / std::sqrt(var / n);
    };
    CHECK(std::abs(zscore(sum_pi, sumsq_pi)) < 3.0);
    CHECK(std::abs(zscore(sum_ito, sumsq_ito)) < 3.0);
}
