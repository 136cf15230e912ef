#include "doctest.h"

#include "wzw/coefficients.hpp"
#include "wzw/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace wzw;

TEST_CASE("constant sigma carries its closed-form integral") {
    SigmaFn s = SigmaFn::constant_fn(0.7);
    CHECK(s.is_constant);
    CHECK(s.constant == doctest::Approx(0.7));
    CHECK(s.sup_abs == doctest::Approx(0.7));
    CHECK(s.value(0.33) == doctest::Approx(0.7));
    CHECK(sigma_integral(s, 0.2, 0.9) == doctest::Approx(0.7 * 0.7).epsilon(1e-14));
    CHECK(sigma_integral(s, 0.4, 0.4) == doctest::Approx(0.0));
}

TEST_CASE("linear sigma integral matches quadrature of its values") {
    SigmaFn s = SigmaFn::linear_fn(0.5, -0.3, 1.0);
    CHECK(!s.is_constant);
    CHECK(s.value(0.0) == doctest::Approx(0.5));
    CHECK(s.value(1.0) == doctest::Approx(0.2));
    const double direct = sigma_integral(s, 0.1, 0.8);
    const double byquad = quad::integrate([&](double r) { return s.value(r); }, 0.1, 0.8, 12);
    CHECK(direct == doctest::Approx(byquad).epsilon(1e-13));
    // closed form: int (a + b r) dr
    CHECK(direct ==
          doctest::Approx(0.5 * 0.7 - 0.3 * 0.5 * (0.64 - 0.01)).epsilon(1e-13));
}

TEST_CASE("sigma integral refuses reversed intervals") {
    SigmaFn s = SigmaFn::constant_fn(1.0);
    CHECK_THROWS_AS((void)sigma_integral(s, 0.6, 0.2), std::domain_error);
}

TEST_CASE("zero drift family is flat and exactly lipschitz zero") {
    auto cs = make_zero_drift(2, {1.0, -0.5}, {SigmaFn::constant_fn(1.0), SigmaFn::constant_fn(0.4)});
    CHECK(cs.dim == 2);
    CHECK(cs.bound_M == 0.0);
    CHECK(cs.lipschitz_L == 0.0);
    CHECK(!cs.oracle_only);
    CHECK(cs.sigma_sup() == doctest::Approx(1.0));
    std::vector<double> x = {3.0, -2.0}, b(2, 99.0);
    cs.eval_drift(0.5, x, b);
    CHECK(b[0] == 0.0);
    CHECK(b[1] == 0.0);
}

TEST_CASE("tanh drift evaluates componentwise with the stated bounds") {
    auto cs = make_tanh_drift(2, {0.8, -0.5}, {1.0, 1.0},
                              {SigmaFn::constant_fn(0.6), SigmaFn::constant_fn(0.4)});
    std::vector<double> x = {0.3, -1.2}, b(2);
    cs.eval_drift(0.0, x, b);
    CHECK(b[0] == doctest::Approx(0.8 * std::tanh(0.3)).epsilon(1e-15));
    CHECK(b[1] == doctest::Approx(-0.5 * std::tanh(-1.2)).epsilon(1e-15));
    CHECK(cs.bound_M == doctest::Approx(0.8));
    CHECK(cs.lipschitz_L == doctest::Approx(0.8));
}

TEST_CASE("coupled tanh drift mixes components through the matrix") {
    // A = [[0.5, -0.25], [0.0, 1.0]]
    auto cs = make_coupled_tanh_drift(2, {0.5, -0.25, 0.0, 1.0}, {0.0, 0.0},
                                      {SigmaFn::constant_fn(0.3), SigmaFn::constant_fn(0.3)});
    std::vector<double> x = {1.0, 2.0}, b(2);
    cs.eval_drift(0.7, x, b);
    CHECK(b[0] == doctest::Approx(std::tanh(0.5 * 1.0 - 0.25 * 2.0)).epsilon(1e-15));
    CHECK(b[1] == doctest::Approx(std::tanh(2.0)).epsilon(1e-15));
    CHECK(cs.bound_M == doctest::Approx(1.0));
}

TEST_CASE("linear drift is flagged oracle-only") {
    auto cs = make_linear_drift(1, {0.7}, {1.0}, {SigmaFn::constant_fn(0.5)});
    CHECK(cs.oracle_only);
    std::vector<double> x = {2.0}, b(1);
    cs.eval_drift(0.1, x, b);
    CHECK(b[0] == doctest::Approx(1.4).epsilon(1e-15));
}

TEST_CASE("analytic jacobians agree with finite differences") {
    auto check_jac = [](const CoefficientSet& cs, std::vector<double> x) {
        const int d = cs.dim;
        std::vector<double> jac(d * d), bp(d), bm(d);
        cs.eval_jacobian(0.3, x, jac);
        const double h = 1e-6;
        for (int j = 0; j < d; ++j) {
            auto xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            cs.eval_drift(0.3, xp, bp);
            cs.eval_drift(0.3, xm, bm);
            for (int i = 0; i < d; ++i)
                CHECK(jac[i * d + j] ==
                      doctest::Approx((bp[i] - bm[i]) / (2.0 * h)).epsilon(5e-9));
        }
    };
    check_jac(make_tanh_drift(2, {0.8, 0.5}, {1.0, 0.8},
                              {SigmaFn::constant_fn(0.6), SigmaFn::constant_fn(0.4)}),
              {0.4, -0.9});
    check_jac(make_coupled_tanh_drift(2, {0.5, -0.25, 0.1, 1.0}, {0.0, 0.0},
                                      {SigmaFn::constant_fn(0.3), SigmaFn::constant_fn(0.3)}),
              {0.6, 0.2});
    check_jac(make_linear_drift(2, {0.7, -0.4}, {1.0, 0.8},
                                {SigmaFn::constant_fn(0.6), SigmaFn::constant_fn(0.4)}),
              {1.3, 0.5});
}

TEST_CASE("family builder broadcasts scalars across components") {
    ParamMap p;
    p["beta"] = {0.8};
    p["c"] = {1.0};
    p["sigma"] = {0.5};
    auto cs = make_coefficients("tanh", "const", 3, 1.0, p);
    CHECK(cs.dim == 3);
    REQUIRE(cs.sigma.size() == 3);
    REQUIRE(cs.init.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(cs.sigma[i].constant == doctest::Approx(0.5));
        CHECK(cs.init[i] == doctest::Approx(1.0));
    }
    std::vector<double> x = {0.2, 0.2, 0.2}, b(3);
    cs.eval_drift(0.0, x, b);
    CHECK(b[1] == doctest::Approx(0.8 * std::tanh(0.2)).epsilon(1e-15));
}

TEST_CASE("family builder accepts per-component lists and time-linear sigma") {
    ParamMap p;
    p["c"] = {1.0, -0.5};
    p["sigma"] = {0.6, 0.4};
    p["sigma_slope"] = {-0.2};
    auto cs = make_coefficients("zero", "linear", 2, 2.0, p);
    CHECK(cs.sigma[0].value(0.0) == doctest::Approx(0.6));
    CHECK(cs.sigma[0].value(1.0) == doctest::Approx(0.4));
    CHECK(cs.sigma[1].value(2.0) == doctest::Approx(0.0));
    CHECK(!cs.sigma[0].is_constant);
}

TEST_CASE("family builder rejects bad names and sizes") {
    ParamMap p;
    p["c"] = {1.0};
    p["sigma"] = {0.5};
    CHECK_THROWS_AS((void)make_coefficients("cubic", "const", 1, 1.0, p), std::invalid_argument);
    CHECK_THROWS_AS((void)make_coefficients("zero", "random", 1, 1.0, p), std::invalid_argument);
    ParamMap bad = p;
    bad["c"] = {1.0, 2.0, 3.0};  // neither scalar nor dim-sized
    CHECK_THROWS_AS((void)make_coefficients("zero", "const", 2, 1.0, bad), std::invalid_argument);
}

TEST_CASE("sigma integral cache matches direct integration") {
    ParamMap p;
    p["c"] = {1.0, 1.0};
    p["sigma"] = {0.6, 0.4};
    p["sigma_slope"] = {0.3, -0.1};
    auto cs = make_coefficients("zero", "linear", 2, 1.0, p);
    Partition pi = Partition::uniform(1.0, 5);
    SigmaIntegralCache cache(cs, pi);
    for (int i = 0; i < 2; ++i) {
        for (int c = 0; c < 5; ++c)
            CHECK(cache.cell(i, c) ==
                  doctest::Approx(sigma_integral(cs.sigma[i], pi.node(c), pi.node(c + 1)))
                      .epsilon(1e-13));
        CHECK(cache.between_nodes(i, 1, 4) ==
              doctest::Approx(sigma_integral(cs.sigma[i], pi.node(1), pi.node(4)))
                  .epsilon(1e-13));
        CHECK(cache.between_nodes(i, 0, 5) ==
              doctest::Approx(sigma_integral(cs.sigma[i], 0.0, 1.0)).epsilon(1e-13));
        CHECK(cache.between_nodes(i, 2, 2) == doctest::Approx(0.0));
    }
}

TEST_CASE("default jacobian falls back to finite differences") {
    // hand-made set with no analytic jacobian
    CoefficientSet cs;
    cs.dim = 1;
    cs.drift = [](double, std::span<const double> x, std::span<double> out) {
        out[0] = std::sin(x[0]);
    };
    cs.sigma = {SigmaFn::constant_fn(0.5)};
    cs.init = {1.0};
    std::vector<double> x = {0.8}, jac(1);
    cs.eval_jacobian(0.0, x, jac);
    CHECK(jac[0] == doctest::Approx(std::cos(0.8)).epsilon(1e-6));
}
