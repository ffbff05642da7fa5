#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "finopt/core_solver.hpp"
#include "finopt/functionals.hpp"
#include "finopt/sequences.hpp"
#include "generators.hpp"

using namespace finopt;

TEST_CASE("a_{S,m} arcs have constant lateral density M_m") {
    const ArcSequence seq{0.1, 16, 0.05, 1.0};
    seq.validate();
    CHECK(seq.plateau() == doctest::Approx(0.05 + (0.1 - 0.05) * 16).epsilon(1e-15));
    gen::Rng r(1);
    for (int k = 0; k < 500; ++k) {
        const double x = r.uniform(0.0, seq.support());
        const double a = seq.value(x), s = seq.slope(x);
        CHECK(a >= seq.a0 * (1 - 1e-15));
        CHECK(a * std::sqrt(1.0 + s * s) == doctest::Approx(seq.plateau()).epsilon(1e-9));
        CHECK(seq.density(x) == seq.plateau());
    }
    CHECK(seq.value(0.5) == seq.a0);
    CHECK(seq.density(0.5) == seq.a0);
    // Period endpoints return to a0.
    for (int q = 0; q <= 16; ++q) CHECK(seq.value(q * seq.period()) == doctest::Approx(seq.a0).epsilon(1e-9));
}

TEST_CASE("a_{S,m} slope is the derivative of its value") {
    const ArcSequence seq{0.1, 8, 0.05, 1.0};
    gen::Rng r(2);
    for (int k = 0; k < 100; ++k) {
        const double x = r.uniform(1e-4, seq.support() - 1e-4);
        const double d = 1e-8;
        const double fd = (seq.value(x + d) - seq.value(x - d)) / (2 * d);
        if (std::abs(seq.slope(x)) < 1e3) CHECK(fd == doctest::Approx(seq.slope(x)).epsilon(1e-5));
    }
}

TEST_CASE("a_{S,m} sup norm sits at the first peak and decays like 1/m") {
    // Circle oracle: the rising arc is (x - c)^2 + a^2 = M^2 with c = sqrt(M^2 - a0^2).
    const double S = 0.1, a0 = 0.05, l = 1.0;
    double prev = 0.0;
    for (int m : {8, 16, 32, 64, 128, 256}) {
        const ArcSequence seq{S, m, a0, l};
        const double M = a0 + (S - a0 * l) * m, half = 0.5 / (double(m) * m);
        const double c = std::sqrt(M * M - a0 * a0);
        const double peak = std::sqrt(M * M - (half - c) * (half - c));
        CHECK(seq.value(half) == doctest::Approx(peak).epsilon(1e-12));
        gen::Rng r(m);
        for (int k = 0; k < 200; ++k) CHECK(seq.value(r.uniform(0.0, l)) <= peak * (1 + 1e-12));
        const double norm = peak - a0;
        // a^2 - a0^2 ~ (S - a0 l) / m, so m * norm tends to (S - a0 l) / (2 a0) while m^2 * norm grows.
        if (prev > 0.0) {
            CHECK(prev / norm > 1.4);
            CHECK(prev / norm < 2.01);
        }
        prev = norm;
        if (m == 256) CHECK(m * norm == doctest::Approx((S - a0 * l) / (2 * a0)).epsilon(0.01));
    }
}

TEST_CASE("ArcSequence validation") {
    CHECK_THROWS_AS((ArcSequence{0.01, 8, 0.05, 1.0}.validate()), std::invalid_argument);  // S < a0 l
    CHECK_THROWS_AS((ArcSequence{0.1, 0, 0.05, 1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ArcSequence{0.1, 1, 0.05, 1.0}.validate()), std::invalid_argument);   // 1/m = l
    CHECK((ArcSequence{0.05, 8, 0.05, 1.0}.degenerate()));
}

TEST_CASE("b_{S,m} and bang densities carry exactly the budget") {
    const Grid g(1.0, 1000);
    for (int m : {3, 8, 16, 64}) CHECK(build_bsm(0.1, m, 0.05, g).total() == doctest::Approx(0.1).epsilon(1e-13));
    const Grid h(0.1, 500);
    for (double M : {6.25e-3, 12.5e-3, 25e-3, 50e-3}) {
        const auto b = build_bang_b(M, 3e-4, 1e-3, h);
        CHECK(b.total() == doctest::Approx(3e-4).epsilon(1e-13));
        CHECK(bang_switch(M, 3e-4, 1e-3, 0.1) == doctest::Approx(2e-4 / (M - 1e-3)).epsilon(1e-15));
        CHECK(b.density.maxCoeff() == doctest::Approx(M).epsilon(1e-15));
    }
}

TEST_CASE("sampled a_{S,m} has surface S and density plateau on the support") {
    const double S = 0.1, a0 = 0.05;
    for (int m : {8, 16}) {
        const Grid g(1.0, 8192);
        const auto a = build_asm(S, m, a0, g);
        CHECK(surface(a) == doctest::Approx(S).epsilon(2e-3));
        CHECK(a.values.minCoeff() >= a0);
    }
    CHECK_THROWS_AS(build_asm(S, 64, a0, Grid(1.0, 1000)), std::invalid_argument);  // under-resolved
}

TEST_CASE("reconstructed radius reproduces the bang density") {
    const Grid g(0.1, 2000);
    const auto b = build_bang_b(12.5e-3, 3e-4, 1e-3, g);
    const auto specs = resolved_intervals(b);
    REQUIRE(specs.size() == 1);
    CHECK(specs[0].x_start == 0.0);
    CHECK(specs[0].n_oscillations >= 1);
    const auto a = reconstruct_radius(b, specs, 1e-3);
    const auto rebuilt = surface_density(a);
    CHECK(rebuilt.total() == doctest::Approx(b.total()).epsilon(2e-2));
    CHECK(a.values.minCoeff() >= 1e-3);
    CHECK(a.values.maxCoeff() <= surface_radius_bound(3e-4, 0.1));
}

TEST_CASE("excess intervals find maximal runs above the floor") {
    const Grid g(1.0, 10);
    SurfaceMeasure b = SurfaceMeasure::constant(g, 1.0, 1.0);
    b.density[2] = b.density[3] = 2.0;
    b.density[7] = 1.5;
    const auto runs = excess_intervals(b);
    REQUIRE(runs.size() == 2);
    CHECK(runs[0].x_start == doctest::Approx(0.2));
    CHECK(runs[0].x_end == doctest::Approx(0.4));
    CHECK(runs[1].x_start == doctest::Approx(0.7));
    CHECK(default_oscillations(0.2) == 6);
}

TEST_CASE("volume sequence is feasible and its flux grows linearly") {
    PhysicalParams p;
    p.k = 1.0;
    p.h = ConvectionProfile::constant(0.005);
    p.h_r = 0.005;
    p.T_d = 1.0;
    const Grid g(1.0, 1 << 15);
    VolumeSequenceOptions opts;
    opts.params = p;
    double prev = 0.0;
    for (int n : {5, 10}) {
        const auto m = build_volume_sequence(n, 2.0, 1.0, g, opts);
        CHECK(m.volume <= 2.0 - 1.0 / n);
        CHECK(m.density.total() == doctest::Approx(n).epsilon(1e-12));
        REQUIRE(m.flux.has_value());
        CHECK(*m.flux > prev);
        prev = *m.flux;
    }
    CHECK_THROWS_AS(build_volume_sequence(5, 2.0, 1.0, Grid(1.0, 16)), std::invalid_argument);
}
