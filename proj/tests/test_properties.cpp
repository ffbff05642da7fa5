// Randomized invariants over hand-rolled generators.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "finopt/core_solver.hpp"
#include "finopt/functionals.hpp"
#include "finopt/optimizer.hpp"
#include "generators.hpp"

using namespace finopt;

namespace {

struct Case {
    RadiusProfile a;
    SurfaceMeasure b;
    PhysicalParams p;
};

Case draw(gen::Rng& r, bool atoms) {
    const double length = r.uniform(0.02, 0.3), a0 = r.uniform(0.2e-3, 3e-3);
    const Grid g = gen::grid(r, length, 20, 600);
    auto a = gen::profile(r, g, a0);
    auto b = gen::density(r, g, a0, 8.0 * a0, atoms);
    return {std::move(a), std::move(b), gen::params(r, length)};
}

}  // namespace

TEST_CASE("temperature is non-increasing and within [T_inf, T_d]") {
    gen::Rng r(100);
    for (int t = 0; t < 200; ++t) {
        const auto c = draw(r, t % 2 == 0);
        const auto T = solve_temperature(c.a, c.b, c.p);
        const double dT = c.p.delta_T();
        CHECK(T.theta[0] == dT);
        for (Index i = 1; i < T.theta.size(); ++i) {
            CHECK(T.theta[i] <= T.theta[i - 1]);
            CHECK(T.theta[i] >= 0.0);
        }
    }
}

TEST_CASE("boundary and integral fluxes agree") {
    gen::Rng r(200);
    for (int t = 0; t < 200; ++t) {
        const auto c = draw(r, t % 2 == 0);
        const auto T = solve_temperature(c.a, c.b, c.p);
        const auto rep = flux_report(c.a, c.b, c.p, T);
        CHECK(rep.F_boundary > 0.0);
        CHECK(rep.relative_gap <= 1e-10);
    }
}

TEST_CASE("flux increases with the surface density and with any atom") {
    gen::Rng r(300);
    for (int t = 0; t < 100; ++t) {
        auto c = draw(r, false);
        const double F = solve_flux(c.a, c.b, c.p);
        SurfaceMeasure more = c.b;
        const Index j = r.integer(0, static_cast<int>(more.density.size()) - 1);
        more.density[j] *= r.uniform(1.01, 2.0);
        // Cells where theta ~ 1e-19 dT contribute nothing measurable.
        CHECK(flux_change(c.a, c.b, more, c.p) >= -1e-15 * F);
        SurfaceMeasure atom = c.b;
        atom.atoms.push_back({r.uniform(0.0, c.a.grid.length()), r.uniform(0.01, 1.0) * c.b.floor * c.a.grid.length()});
        CHECK(solve_flux(c.a, atom, c.p) >= F);
    }
}

TEST_CASE("flux is concave in b along random segments") {
    gen::Rng r(400);
    for (int t = 0; t < 60; ++t) {
        auto c = draw(r, false);
        const auto b1 = gen::density(r, c.a.grid, c.b.floor, 8.0 * c.b.floor, false);
        SurfaceMeasure mid = c.b;
        mid.density = 0.5 * (c.b.density + b1.density);
        const double f0 = solve_flux(c.a, c.b, c.p), f1 = solve_flux(c.a, b1, c.p), fm = solve_flux(c.a, mid, c.p);
        CHECK(fm >= 0.5 * (f0 + f1) * (1 - 1e-13));
    }
}

TEST_CASE("profiles under a surface budget stay below the radius bound") {
    gen::Rng r(500);
    for (int t = 0; t < 300; ++t) {
        const double length = r.uniform(0.01, 1.0), a0 = r.uniform(1e-4, 1e-2);
        const auto a = gen::profile(r, gen::grid(r, length), a0);
        const double S0 = surface(a) * r.uniform(1.0, 2.0);
        CHECK(a.values.maxCoeff() <= surface_radius_bound(S0, length) * (1 + 1e-9));
    }
}

TEST_CASE("projection output is always feasible") {
    gen::Rng r(600);
    for (int t = 0; t < 300; ++t) {
        const Index n = r.integer(1, 300);
        const double lo = r.uniform(0.1, 1.0), hi = lo * r.uniform(1.01, 20.0), h = r.uniform(1e-4, 1.0);
        const double budget = n * h * r.uniform(lo, hi);
        VectorXd z(n);
        for (Index i = 0; i < n; ++i) z[i] = r.uniform(-hi, 2.0 * hi);
        const VectorXd y = project_box_budget(z, lo, hi, h, budget);
        CHECK(y.minCoeff() >= lo);
        CHECK(y.maxCoeff() <= hi);
        CHECK(h * y.sum() <= budget * (1 + 1e-12));
    }
}
