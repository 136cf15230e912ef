#include "doctest.h"

#include "wzw/brownian.hpp"
#include "wzw/partition.hpp"
#include "wzw/philox.hpp"

#include <cmath>
#include <sstream>

using namespace wzw;

TEST_CASE("philox block function matches reference vectors") {
    // counter/key all zero
    auto b = philox::block({0u, 0u, 0u, 0u}, {0u, 0u});
    CHECK(b[0] == 0x6627e8d5u);
    CHECK(b[1] == 0xe169c58du);
    CHECK(b[2] == 0xbc57ac4cu);
    CHECK(b[3] == 0x9b00dbd8u);

    // counter/key all ones
    b = philox::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                      {0xffffffffu, 0xffffffffu});
    CHECK(b[0] == 0x408f276du);
    CHECK(b[1] == 0x41c83b0eu);
    CHECK(b[2] == 0xa20bc7c6u);
    CHECK(b[3] == 0x6d5451fdu);

    // pi digits pattern
    b = philox::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                      {0xa4093822u, 0x299f31d0u});
    CHECK(b[0] == 0xd16cfe09u);
    CHECK(b[1] == 0x94fdccebu);
    CHECK(b[2] == 0x5001e420u);
    CHECK(b[3] == 0x24126ea1u);
}

TEST_CASE("philox derived streams are frozen") {
    auto u = philox::uniforms(42u, 7u, 1u, 3u);
    CHECK(u[0] == doctest::Approx(0.15553518720448806).epsilon(1e-15));
    CHECK(u[1] == doctest::Approx(0.83744769635212402).epsilon(1e-15));
    CHECK(philox::gaussian(42u, 7u, 1u, 3u) == doctest::Approx(1.0074573685554085).epsilon(1e-14));
}

TEST_CASE("uniform pairs stay inside the open unit interval") {
    for (uint32_t i = 0; i < 200; ++i) {
        auto u = philox::uniforms(9u, 1u, i, 0u);
        CHECK(u[0] > 0.0);
        CHECK(u[0] < 1.0);
        CHECK(u[1] > 0.0);
        CHECK(u[1] < 1.0);
    }
}

TEST_CASE("sampled brownian paths start at zero and have the right shape") {
    BrownianPath w = sample_brownian(2, 1.0, 64, 123u, 5u);
    CHECK(w.dim == 2);
    CHECK(w.times.size() == 65);
    CHECK(w.times.front() == 0.0);
    CHECK(w.times.back() == doctest::Approx(1.0));
    CHECK(w.value(0, 0) == 0.0);
    CHECK(w.value(1, 0) == 0.0);
}

TEST_CASE("brownian increments have the expected variance and independence") {
    const size_t steps = 128, npaths = 400;
    double s1 = 0.0, s2 = 0.0, cross = 0.0;
    size_t n = 0;
    for (size_t p = 0; p < npaths; ++p) {
        BrownianPath w = sample_brownian(2, 1.0, steps, 2024u, static_cast<uint32_t>(p));
        for (size_t i = 0; i < steps; ++i) {
            const double d0 = w.value(0, i + 1) - w.value(0, i);
            const double d1 = w.value(1, i + 1) - w.value(1, i);
            s1 += d0 * d0;
            s2 += d1 * d1;
            cross += d0 * d1;
            ++n;
        }
    }
    const double dt = 1.0 / steps;
    // chi-square-ish spread: sd of mean of d^2 is dt*sqrt(2/n)
    const double tol = 4.0 * dt * std::sqrt(2.0 / double(n));
    CHECK(std::abs(s1 / n - dt) < tol);
    CHECK(std::abs(s2 / n - dt) < tol);
    CHECK(std::abs(cross / n) < tol);
}

TEST_CASE("path sampling is deterministic in seed and index") {
    BrownianPath a = sample_brownian(1, 1.0, 32, 77u, 3u);
    BrownianPath b = sample_brownian(1, 1.0, 32, 77u, 3u);
    BrownianPath c = sample_brownian(1, 1.0, 32, 77u, 4u);
    CHECK(a.digest() == b.digest());
    CHECK(a.digest() != c.digest());
    for (size_t i = 0; i <= 32; ++i) CHECK(a.value(0, i) == b.value(0, i));
}

TEST_CASE("index_of accepts grid times and rejects the rest") {
    BrownianPath w = sample_brownian(1, 1.0, 16, 1u, 0u);
    CHECK(w.index_of(0.0) == 0);
    CHECK(w.index_of(0.5) == 8);
    CHECK(w.index_of(1.0) == 16);
    CHECK_THROWS_AS((void)w.index_of(0.31), std::invalid_argument);
}

TEST_CASE("at() interpolates linearly between grid points") {
    BrownianPath w = sample_brownian(1, 1.0, 8, 5u, 2u);
    const double mid = 0.5 * (w.value(0, 3) + w.value(0, 4));
    CHECK(w.at(0, (3.0 + 0.5) / 8.0) == doctest::Approx(mid).epsilon(1e-14));
    CHECK(w.at(0, 0.5) == doctest::Approx(w.value(0, 4)).epsilon(1e-14));
}

TEST_CASE("polygonal interpolant agrees with the path at partition nodes") {
    BrownianPath w = sample_brownian(1, 1.0, 64, 9u, 1u);
    Partition pi = Partition::uniform(1.0, 8);
    for (size_t k = 0; k <= 8; ++k) {
        const double t = pi.node(k);
        CHECK(polygonal_eval(w, pi, 0, t) ==
              doctest::Approx(w.value(0, w.index_of(t))).epsilon(1e-14));
    }
    // midpoint of a cell is the average of the endpoints
    const double a = w.value(0, w.index_of(pi.node(2)));
    const double b = w.value(0, w.index_of(pi.node(3)));
    CHECK(polygonal_eval(w, pi, 0, 0.5 * (pi.node(2) + pi.node(3))) ==
          doctest::Approx(0.5 * (a + b)).epsilon(1e-14));
}

TEST_CASE("increment table columns reproduce node differences") {
    BrownianPath w = sample_brownian(2, 1.0, 64, 31u, 6u);
    Partition pi = Partition::uniform(1.0, 4);
    IncrementTable z = partition_increments(w, pi);
    CHECK(z.dim == 2);
    CHECK(z.partition.cells() == 4);
    for (size_t i = 0; i < 2; ++i) {
        double total = 0.0;
        for (size_t c = 0; c < 4; ++c) {
            const double expect =
                w.value(i, w.index_of(pi.node(c + 1))) - w.value(i, w.index_of(pi.node(c)));
            CHECK(z(i, c) == doctest::Approx(expect).epsilon(1e-14));
            total += z(i, c);
        }
        CHECK(total == doctest::Approx(w.value(i, 64)).epsilon(1e-12));
    }
    CHECK(z.path_digest == w.digest());
}

TEST_CASE("increment table refuses partitions off the fine grid") {
    BrownianPath w = sample_brownian(1, 1.0, 16, 8u, 0u);
    Partition pi = Partition::uniform(1.0, 3);  // 16/3 is not integral
    CHECK_THROWS_AS((void)partition_increments(w, pi), std::invalid_argument);
}

TEST_CASE("sample_brownian_on evaluates at requested times only") {
    std::vector<double> times = {0.0, 0.25, 0.5, 0.75, 1.0};
    BrownianPath w = sample_brownian_on(1, times, 55u, 2u);
    BrownianPath full = sample_brownian(1, 1.0, 4, 55u, 2u);
    REQUIRE(w.times.size() == times.size());
    for (size_t i = 0; i < times.size(); ++i)
        CHECK(w.value(0, i) == doctest::Approx(full.value(0, i)).epsilon(1e-14));
}

TEST_CASE("increment dump has one row per component and cell") {
    BrownianPath w = sample_brownian(2, 1.0, 8, 3u, 0u);
    Partition pi = Partition::uniform(1.0, 2);
    IncrementTable z = partition_increments(w, pi);
    std::ostringstream os;
    dump_csv(z, os);
    std::istringstream is(os.str());
    std::string line;
    size_t rows = 0;
    std::getline(is, line);
    CHECK(line == "component,cell,value");
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 2 * 2);
}

TEST_CASE("partition helpers expose geometry consistently") {
    Partition pi = Partition::uniform(2.0, 8);
    CHECK(pi.cells() == 8);
    CHECK(pi.horizon() == doctest::Approx(2.0));
    CHECK(pi.width(3) == doctest::Approx(0.25));
    CHECK(pi.mesh() == doctest::Approx(0.25));
    CHECK(pi.cell_of(0.0) == 0);
    CHECK(pi.cell_of(0.25) == 0);   // node hit resolves to the left cell
    CHECK(pi.cell_of(0.26) == 1);
    CHECK(pi.cell_of(2.0) == 7);
    CHECK(pi.is_node(0.75));
    CHECK(!pi.is_node(0.7));

    Partition gen = Partition::from_nodes({0.0, 0.5, 0.75, 1.0});
    CHECK(gen.cells() == 3);
    CHECK(gen.width(0) == doctest::Approx(0.5));
    CHECK(gen.mesh() == doctest::Approx(0.5));
    CHECK(gen.cell_of(0.6) == 1);
}
